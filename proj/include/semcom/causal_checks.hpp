#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "semcom/pmf.hpp"
#include "semcom/scm.hpp"

namespace semcom {

/// Total map from a full assignment (symbol indices in Scm declaration order)
/// to a representation id.
using ReprMap = std::function<std::string(const std::vector<int>&)>;

/// Tests the factorization p(x) = prod_i p(x_i | pa_i) against the joint at
/// every state. Variables absent from parent_sets get an empty parent set.
bool check_disentangled(const JointPmf& joint,
                        const std::map<std::string, std::vector<std::string>>& parent_sets);

/// True iff the conditional tables P(var | parents) of the two models agree
/// wherever both are defined (nonzero parent-configuration mass in both).
bool conditional_tables_match(const Scm& a, const Scm& b, const std::string& var);

/// Independent-causal-mechanisms check: intervening elsewhere must leave
/// P(var | parents) untouched.
bool check_mechanism_independence(const Scm& scm, const std::string& var, const Intervention& iv);

/// Causal invariant prediction: p^{do(k_i)}(content | z) must agree across all
/// queries for every representation value z reachable under both.
bool check_generalizable(const Scm& scm, const std::string& content_var, const ReprMap& repr,
                         const std::vector<Intervention>& queries);

/// Structure/variability invariance: p^{do(style)}(z | structure) must agree
/// across all style interventions.
bool check_style_invariance(const Scm& scm, const std::string& structure_var, const ReprMap& repr,
                            const std::vector<Intervention>& style_ivs);

/// Counterfactual invariance to q_var: for every factual world and every
/// forced value of q_var, the representation id never changes.
bool check_counterfactually_invariant(const Scm& scm, const ReprMap& repr, const std::string& q_var);

}  // namespace semcom
