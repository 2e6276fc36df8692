#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semcom/pmf.hpp"

namespace semcom {

/// Enumeration guard for exact inference: neither the assignment space nor the
/// joint noise space may exceed this many states.
inline constexpr std::size_t kMaxEnumerationStates = std::size_t{1} << 24;

struct Variable {
    std::string id;
    std::vector<std::string> alphabet;

    bool operator==(const Variable&) const = default;
};

/// Structural assignment for one variable: a total table over
/// (parent assignment, noise symbol) pairs plus the exogenous noise pmf.
/// table[pa_index * noise_size + noise_index] holds the target symbol index,
/// where pa_index is mixed-radix over the parents in listed order.
struct Mechanism {
    std::string target;
    std::vector<std::string> parents;
    std::vector<double> noise;
    std::vector<int> table;

    bool operator==(const Mechanism&) const = default;
};

struct Scm {
    std::vector<Variable> variables;
    std::vector<Mechanism> mechanisms;

    bool operator==(const Scm&) const = default;

    int index_of(const std::string& id) const;               // -1 when absent
    const Variable& variable(const std::string& id) const;   // throws unknown-variable
    const Mechanism& mechanism_for(const std::string& id) const;
    int symbol_index(const std::string& var_id, const std::string& symbol) const;

    /// Deterministic topological order (ties broken by declaration order).
    /// Throws cycle-detected when the parent graph has a cycle.
    std::vector<int> topological_order() const;

    std::size_t assignment_states() const;
    std::size_t noise_states() const;
};

struct Intervention {
    std::map<std::string, std::string> assignments;
    std::map<std::string, std::string> conditioning;
};

struct CounterfactualQuery {
    std::map<std::string, std::string> factual;  // may be partial
    Intervention intervention;
    std::string target;
};

struct ValidationIssue {
    std::string code;
    std::string detail;
};

/// Reports every invariant violation; an empty list means the model is valid.
std::vector<ValidationIssue> validate(const Scm& scm);
/// Throws the first validation issue as an Error.
void ensure_valid(const Scm& scm);

/// Exact joint over full assignments, by enumerating the joint noise space and
/// pushing each realization through the mechanisms.
JointPmf joint_distribution(const Scm& scm);

/// Deterministic ancestral sampling; the same seed always yields the same
/// full assignment (symbol indices in declaration order).
std::vector<int> sample(const Scm& scm, std::uint64_t seed);

/// The mutilated model: every assigned variable's mechanism becomes a
/// parentless constant; everything else is untouched.
Scm apply_do(const Scm& scm, const Intervention& iv);

/// Marginal of `target` in the mutilated model, conditioned on iv.conditioning.
Pmf interventional_distribution(const Scm& scm, const Intervention& iv, const std::string& target);

/// Abduction / action / prediction. The posterior over the joint noise given
/// the (possibly partial) factual evidence is pushed through the mutilated
/// mechanisms; returns the joint over all variables.
JointPmf counterfactual_joint(const Scm& scm, const CounterfactualQuery& q);
Pmf counterfactual(const Scm& scm, const CounterfactualQuery& q);

/// Canonical text serialization (variables then mechanisms, sorted by id).
/// Round trip through parse_scm is byte-identical.
std::string serialize_scm(const Scm& scm);
Scm parse_scm(const std::string& text);

}  // namespace semcom
