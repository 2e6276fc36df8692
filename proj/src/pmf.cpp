#include "semcom/pmf.hpp"

#include <algorithm>
#include <cmath>

#include "semcom/errors.hpp"

namespace semcom {

double Pmf::mass() const {
    double s = 0;
    for (double v : p) s += v;
    return s;
}

bool Pmf::is_normalized(double tol) const { return std::abs(mass() - 1.0) <= tol; }

std::optional<std::size_t> Pmf::point_mass(double tol) const {
    for (std::size_t i = 0; i < p.size(); ++i)
        if (std::abs(p[i] - 1.0) <= tol) return i;
    return std::nullopt;
}

double Pmf::entropy_bits() const {
    double h = 0;
    for (double v : p)
        if (v > 0) h -= v * std::log2(v);
    return h;
}

JointPmf::JointPmf(std::vector<std::string> ids, std::vector<int> cardinalities)
    : ids_(std::move(ids)), card_(std::move(cardinalities)) {
    if (ids_.size() != card_.size()) fail("internal", "ids/cardinalities mismatch");
    std::size_t n = 1;
    for (int c : card_) {
        if (c <= 0) fail("internal", "cardinality must be positive");
        n *= static_cast<std::size_t>(c);
    }
    p_.assign(n, 0.0);
}

int JointPmf::index_of_id(const std::string& id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (ids_[i] == id) return static_cast<int>(i);
    fail("unknown-variable", "no variable '" + id + "' in joint");
}

std::size_t JointPmf::flat_index(const std::vector<int>& assignment) const {
    if (assignment.size() != card_.size()) fail("internal", "assignment arity mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < card_.size(); ++i) {
        if (assignment[i] < 0 || assignment[i] >= card_[i])
            fail("internal", "symbol index out of range");
        idx = idx * static_cast<std::size_t>(card_[i]) + static_cast<std::size_t>(assignment[i]);
    }
    return idx;
}

std::vector<int> JointPmf::assignment_of(std::size_t flat) const {
    std::vector<int> a(card_.size());
    for (std::size_t i = card_.size(); i-- > 0;) {
        a[i] = static_cast<int>(flat % static_cast<std::size_t>(card_[i]));
        flat /= static_cast<std::size_t>(card_[i]);
    }
    return a;
}

double JointPmf::mass() const {
    double s = 0;
    for (double v : p_) s += v;
    return s;
}

void JointPmf::normalize() {
    double s = mass();
    if (s <= 0) fail("internal", "cannot normalize zero-mass distribution");
    for (double& v : p_) v /= s;
}

Pmf JointPmf::marginal(const std::string& id) const {
    int vi = index_of_id(id);
    Pmf out;
    out.p.assign(static_cast<std::size_t>(card_[vi]), 0.0);
    for (std::size_t f = 0; f < p_.size(); ++f) {
        if (p_[f] == 0) continue;
        out.p[static_cast<std::size_t>(assignment_of(f)[vi])] += p_[f];
    }
    return out;
}

JointPmf JointPmf::marginal_over(const std::vector<std::string>& subset) const {
    std::vector<int> sel;
    std::vector<int> cards;
    sel.reserve(subset.size());
    for (const auto& id : subset) {
        int vi = index_of_id(id);
        sel.push_back(vi);
        cards.push_back(card_[vi]);
    }
    JointPmf out(subset, cards);
    std::vector<int> sub(sel.size());
    for (std::size_t f = 0; f < p_.size(); ++f) {
        if (p_[f] == 0) continue;
        auto a = assignment_of(f);
        for (std::size_t i = 0; i < sel.size(); ++i) sub[i] = a[static_cast<std::size_t>(sel[i])];
        out.at(out.flat_index(sub)) += p_[f];
    }
    return out;
}

std::optional<JointPmf> JointPmf::condition(const std::map<std::string, int>& evidence) const {
    JointPmf out = *this;
    for (std::size_t f = 0; f < p_.size(); ++f) {
        if (out.p_[f] == 0) continue;
        auto a = assignment_of(f);
        for (const auto& [id, sym] : evidence) {
            if (a[static_cast<std::size_t>(index_of_id(id))] != sym) {
                out.p_[f] = 0;
                break;
            }
        }
    }
    double s = out.mass();
    if (s <= 0) return std::nullopt;
    for (double& v : out.p_) v /= s;
    return out;
}

double JointPmf::total_variation(const JointPmf& a, const JointPmf& b) {
    if (a.ids_ != b.ids_ || a.card_ != b.card_)
        fail("internal", "total variation requires identical supports");
    double s = 0;
    for (std::size_t f = 0; f < a.p_.size(); ++f) s += std::abs(a.p_[f] - b.p_[f]);
    return 0.5 * s;
}

}  // namespace semcom
