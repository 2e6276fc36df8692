#include "semcom/causal_checks.hpp"

#include <algorithm>
#include <cmath>

#include "semcom/errors.hpp"

namespace semcom {

bool check_disentangled(const JointPmf& joint,
                        const std::map<std::string, std::vector<std::string>>& parent_sets) {
    const auto& ids = joint.ids();
    for (const auto& [id, parents] : parent_sets) {
        (void)joint.index_of_id(id);
        for (const auto& p : parents) (void)joint.index_of_id(p);
    }
    // Per-variable marginals over (x_i, pa_i) and pa_i, for the conditionals.
    struct Factor {
        std::vector<std::string> over;   // variable then parents
        JointPmf with_var;
        JointPmf parents_only;
        bool has_parents = false;
    };
    std::vector<Factor> factors;
    for (const auto& id : ids) {
        Factor f;
        auto it = parent_sets.find(id);
        std::vector<std::string> parents = it == parent_sets.end() ? std::vector<std::string>{} : it->second;
        f.over.push_back(id);
        f.over.insert(f.over.end(), parents.begin(), parents.end());
        f.with_var = joint.marginal_over(f.over);
        f.has_parents = !parents.empty();
        if (f.has_parents) f.parents_only = joint.marginal_over(parents);
        factors.push_back(std::move(f));
    }
    for (std::size_t flat = 0; flat < joint.states(); ++flat) {
        auto a = joint.assignment_of(flat);
        double factored = 1.0;
        for (std::size_t i = 0; i < ids.size() && factored != 0.0; ++i) {
            const Factor& f = factors[i];
            std::vector<int> sub;
            sub.reserve(f.over.size());
            for (const auto& vid : f.over)
                sub.push_back(a[static_cast<std::size_t>(joint.index_of_id(vid))]);
            double num = f.with_var.at(f.with_var.flat_index(sub));
            double den = 1.0;
            if (f.has_parents) {
                std::vector<int> pa(sub.begin() + 1, sub.end());
                den = f.parents_only.at(f.parents_only.flat_index(pa));
            }
            factored = den > 0 ? factored * (num / den) : 0.0;
        }
        if (std::abs(factored - joint.at(flat)) > kDistributionTolerance) return false;
    }
    return true;
}

namespace {

// Conditional table P(var | parents-of-var-in-model) from an exact joint.
// Returns pairs (parent flat config mass, conditional pmf).
struct ConditionalTable {
    std::vector<std::string> parents;
    JointPmf joint_var_parents;  // var first, then parents
    JointPmf parents_marginal;
    bool has_parents;
};

ConditionalTable conditional_table(const Scm& model, const std::string& var) {
    ConditionalTable t;
    t.parents = model.mechanism_for(var).parents;
    std::vector<std::string> over{var};
    over.insert(over.end(), t.parents.begin(), t.parents.end());
    JointPmf joint = joint_distribution(model);
    t.joint_var_parents = joint.marginal_over(over);
    t.has_parents = !t.parents.empty();
    if (t.has_parents) t.parents_marginal = joint.marginal_over(t.parents);
    return t;
}

}  // namespace

bool conditional_tables_match(const Scm& a, const Scm& b, const std::string& var) {
    const Mechanism& ma = a.mechanism_for(var);
    ConditionalTable ta = conditional_table(a, var);
    ConditionalTable tb = conditional_table(b, var);
    if (ta.parents != tb.parents) return false;

    const int card = static_cast<int>(a.variable(var).alphabet.size());
    std::size_t pa_states = 1;
    for (const auto& p : ma.parents) pa_states *= a.variable(p).alphabet.size();

    for (std::size_t pa = 0; pa < pa_states; ++pa) {
        std::vector<int> pa_assign;
        if (ta.has_parents) pa_assign = ta.parents_marginal.assignment_of(pa);
        double mass_a = ta.has_parents ? ta.parents_marginal.at(pa) : 1.0;
        double mass_b = tb.has_parents ? tb.parents_marginal.at(pa) : 1.0;
        if (mass_a <= 0 || mass_b <= 0) continue;  // defined in both or skipped
        for (int x = 0; x < card; ++x) {
            std::vector<int> full{x};
            full.insert(full.end(), pa_assign.begin(), pa_assign.end());
            double ca = ta.joint_var_parents.at(ta.joint_var_parents.flat_index(full)) / mass_a;
            double cb = tb.joint_var_parents.at(tb.joint_var_parents.flat_index(full)) / mass_b;
            if (std::abs(ca - cb) > kDistributionTolerance) return false;
        }
    }
    return true;
}

bool check_mechanism_independence(const Scm& scm, const std::string& var, const Intervention& iv) {
    if (iv.assignments.count(var))
        fail("invalid-argument", "mechanism-independence check requires a non-intervened variable");
    return conditional_tables_match(scm, apply_do(scm, iv), var);
}

namespace {

// P(outcome | z) per representation value under one mutilated model, where
// outcome is read off a designated variable.
struct ReprConditionals {
    std::map<std::string, double> z_mass;
    std::map<std::string, std::vector<double>> outcome_given_z;
};

ReprConditionals repr_conditionals(const Scm& scm, const Intervention& iv, const ReprMap& repr,
                                   const std::string& outcome_var) {
    JointPmf joint = joint_distribution(apply_do(scm, iv));
    int oi = joint.index_of_id(outcome_var);
    int card = joint.cardinalities()[static_cast<std::size_t>(oi)];
    ReprConditionals out;
    for (std::size_t f = 0; f < joint.states(); ++f) {
        double w = joint.at(f);
        if (w <= 0) continue;
        auto a = joint.assignment_of(f);
        std::string z = repr(a);
        out.z_mass[z] += w;
        auto& pmf = out.outcome_given_z[z];
        if (pmf.empty()) pmf.assign(static_cast<std::size_t>(card), 0.0);
        pmf[static_cast<std::size_t>(a[static_cast<std::size_t>(oi)])] += w;
    }
    for (auto& [z, pmf] : out.outcome_given_z)
        for (double& v : pmf) v /= out.z_mass[z];
    return out;
}

bool conditionals_agree(const ReprConditionals& a, const ReprConditionals& b) {
    for (const auto& [z, pmf_a] : a.outcome_given_z) {
        auto it = b.outcome_given_z.find(z);
        if (it == b.outcome_given_z.end()) continue;  // compare only where both reachable
        const auto& pmf_b = it->second;
        for (std::size_t k = 0; k < pmf_a.size(); ++k)
            if (std::abs(pmf_a[k] - pmf_b[k]) > kDistributionTolerance) return false;
    }
    return true;
}

}  // namespace

bool check_generalizable(const Scm& scm, const std::string& content_var, const ReprMap& repr,
                         const std::vector<Intervention>& queries) {
    if (queries.empty()) fail("invalid-argument", "generalizability check needs at least one query");
    std::vector<ReprConditionals> per_query;
    per_query.reserve(queries.size());
    for (const auto& q : queries)
        per_query.push_back(repr_conditionals(scm, q, repr, content_var));
    for (std::size_t i = 0; i < per_query.size(); ++i)
        for (std::size_t j = i + 1; j < per_query.size(); ++j)
            if (!conditionals_agree(per_query[i], per_query[j])) return false;
    return true;
}

namespace {

// P(z | structure value) under one style intervention.
std::map<int, std::map<std::string, double>> z_given_structure(const Scm& scm, const Intervention& iv,
                                                               const ReprMap& repr,
                                                               const std::string& structure_var) {
    JointPmf joint = joint_distribution(apply_do(scm, iv));
    int si = joint.index_of_id(structure_var);
    std::map<int, double> s_mass;
    std::map<int, std::map<std::string, double>> cond;
    for (std::size_t f = 0; f < joint.states(); ++f) {
        double w = joint.at(f);
        if (w <= 0) continue;
        auto a = joint.assignment_of(f);
        int s = a[static_cast<std::size_t>(si)];
        s_mass[s] += w;
        cond[s][repr(a)] += w;
    }
    for (auto& [s, zmap] : cond)
        for (auto& [z, w] : zmap) w /= s_mass[s];
    return cond;
}

}  // namespace

bool check_style_invariance(const Scm& scm, const std::string& structure_var, const ReprMap& repr,
                            const std::vector<Intervention>& style_ivs) {
    for (const auto& iv : style_ivs)
        if (iv.assignments.count(structure_var))
            fail("invalid-style-intervention", "style intervention assigns the structure variable");
    if (style_ivs.size() < 2) return true;
    std::vector<std::map<int, std::map<std::string, double>>> per_iv;
    per_iv.reserve(style_ivs.size());
    for (const auto& iv : style_ivs)
        per_iv.push_back(z_given_structure(scm, iv, repr, structure_var));
    for (std::size_t i = 0; i < per_iv.size(); ++i) {
        for (std::size_t j = i + 1; j < per_iv.size(); ++j) {
            for (const auto& [s, zmap_i] : per_iv[i]) {
                auto it = per_iv[j].find(s);
                if (it == per_iv[j].end()) continue;
                const auto& zmap_j = it->second;
                // Union of z values; a value missing on one side has mass 0.
                for (const auto& [z, w] : zmap_i) {
                    auto jt = zmap_j.find(z);
                    double wj = jt == zmap_j.end() ? 0.0 : jt->second;
                    if (std::abs(w - wj) > kDistributionTolerance) return false;
                }
                for (const auto& [z, wj] : zmap_j)
                    if (!zmap_i.count(z) && wj > kDistributionTolerance) return false;
            }
        }
    }
    return true;
}

bool check_counterfactually_invariant(const Scm& scm, const ReprMap& repr, const std::string& q_var) {
    const Variable& qv = scm.variable(q_var);
    JointPmf joint = joint_distribution(scm);
    for (std::size_t f = 0; f < joint.states(); ++f) {
        if (joint.at(f) <= 0) continue;
        auto x = joint.assignment_of(f);
        std::string z0 = repr(x);
        CounterfactualQuery q;
        for (std::size_t i = 0; i < scm.variables.size(); ++i)
            q.factual[scm.variables[i].id] =
                scm.variables[i].alphabet[static_cast<std::size_t>(x[i])];
        q.target = q_var;
        for (const auto& sym : qv.alphabet) {
            q.intervention.assignments = {{q_var, sym}};
            JointPmf cf = counterfactual_joint(scm, q);
            for (std::size_t g = 0; g < cf.states(); ++g) {
                if (cf.at(g) <= kDistributionTolerance) continue;
                if (repr(cf.assignment_of(g)) != z0) return false;
            }
        }
    }
    return true;
}

}  // namespace semcom
