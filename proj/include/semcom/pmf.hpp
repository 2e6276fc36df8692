#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace semcom {

inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kDistributionTolerance = 1e-9;

/// Distribution over the symbols of a single variable (indexed by symbol).
struct Pmf {
    std::vector<double> p;

    double mass() const;
    bool is_normalized(double tol = kMassTolerance) const;
    /// Index of the point-mass symbol, if one symbol carries all mass within tol.
    std::optional<std::size_t> point_mass(double tol = kDistributionTolerance) const;
    double entropy_bits() const;
};

/// Dense joint distribution over full assignments of an ordered variable set.
/// Assignments are vectors of symbol indices aligned with ids(); the flat
/// index uses mixed radix with the first variable most significant.
class JointPmf {
public:
    JointPmf() = default;
    JointPmf(std::vector<std::string> ids, std::vector<int> cardinalities);

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<int>& cardinalities() const noexcept { return card_; }
    std::size_t states() const noexcept { return p_.size(); }

    int index_of_id(const std::string& id) const;

    std::size_t flat_index(const std::vector<int>& assignment) const;
    std::vector<int> assignment_of(std::size_t flat) const;

    double& at(std::size_t flat) { return p_[flat]; }
    double at(std::size_t flat) const { return p_[flat]; }
    double prob(const std::vector<int>& assignment) const { return p_[flat_index(assignment)]; }

    double mass() const;
    void normalize();

    Pmf marginal(const std::string& id) const;
    /// Marginal over a subset of variables (in the given order).
    JointPmf marginal_over(const std::vector<std::string>& subset) const;
    /// Conditions on fixed values for some variables; renormalizes.
    /// Returns nullopt when the conditioning event has zero mass.
    std::optional<JointPmf> condition(const std::map<std::string, int>& evidence) const;

    /// Total variation distance; requires identical variable sets and order.
    static double total_variation(const JointPmf& a, const JointPmf& b);

private:
    std::vector<std::string> ids_;
    std::vector<int> card_;
    std::vector<double> p_;
};

}  // namespace semcom
