#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "semcom/causal_checks.hpp"
#include "semcom/errors.hpp"
#include "test_util.hpp"

using namespace semcom;
using testutil::bernoulli_scm;
using testutil::random_scm;
using testutil::symbols;
using testutil::xor_chain_scm;

namespace {

// XOR-coupled pair used by several rejection cases.
Scm xor_pair() { return xor_chain_scm(0.5, 0.25); }

std::map<std::string, std::vector<std::string>> true_parents(const Scm& scm) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& m : scm.mechanisms) out[m.target] = m.parents;
    return out;
}

}  // namespace

TEST_CASE("true-parent factorization is accepted on random models") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        Scm scm = random_scm(rng);
        CHECK(check_disentangled(joint_distribution(scm), true_parents(scm)));
    }
}

TEST_CASE("xor-coupled pair with empty parent sets is rejected") {
    auto joint = joint_distribution(xor_pair());
    std::map<std::string, std::vector<std::string>> empty{{"X", {}}, {"Y", {}}};
    CHECK_FALSE(check_disentangled(joint, empty));
}

TEST_CASE("single variable with empty parent set is accepted") {
    auto joint = joint_distribution(bernoulli_scm("X", 0.4));
    CHECK(check_disentangled(joint, {{"X", {}}}));
}

TEST_CASE("mechanism independence holds for non-intervened variables") {
    std::mt19937_64 rng(22);
    int checked = 0;
    while (checked < 100) {
        Scm scm = random_scm(rng);
        if (scm.variables.size() < 2) continue;
        std::size_t iv_idx = rng() % scm.variables.size();
        Intervention iv;
        const auto& vi = scm.variables[iv_idx];
        iv.assignments[vi.id] = vi.alphabet[rng() % vi.alphabet.size()];
        for (std::size_t i = 0; i < scm.variables.size(); ++i) {
            if (i == iv_idx) continue;
            CHECK(check_mechanism_independence(scm, scm.variables[i].id, iv));
        }
        ++checked;
    }
}

TEST_CASE("a hand-mutilated mechanism is caught") {
    Scm scm = xor_pair();
    Scm altered = scm;
    for (auto& m : altered.mechanisms)
        if (m.target == "Y") m.table = {1, 0, 0, 1};  // Y = not (X xor eps)
    CHECK_FALSE(conditional_tables_match(scm, altered, "Y"));
    CHECK(conditional_tables_match(scm, altered, "X"));
}

TEST_CASE("empty intervention never breaks mechanism independence") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        Scm scm = random_scm(rng);
        for (const auto& v : scm.variables)
            CHECK(check_mechanism_independence(scm, v.id, Intervention{}));
    }
}

namespace {

// Three-variable model: style S and content C independent roots, X = C xor S.
Scm style_content_model() {
    Scm scm;
    scm.variables.push_back({"S", symbols(2)});
    scm.variables.push_back({"C", symbols(2)});
    scm.variables.push_back({"X", symbols(2)});
    scm.mechanisms.push_back({"S", {}, {0.6, 0.4}, {0, 1}});
    scm.mechanisms.push_back({"C", {}, {0.5, 0.5}, {0, 1}});
    scm.mechanisms.push_back({"X", {"S", "C"}, {1.0}, {0, 1, 1, 0}});
    return scm;
}

ReprMap read_variable(const Scm& scm, const std::string& id) {
    int vi = scm.index_of(id);
    return [vi](const std::vector<int>& a) { return std::to_string(a[static_cast<std::size_t>(vi)]); };
}

}  // namespace

TEST_CASE("generalizable: single query is trivially invariant") {
    Scm scm = style_content_model();
    Intervention iv;
    iv.assignments = {{"S", "1"}};
    CHECK(check_generalizable(scm, "C", read_variable(scm, "C"), {iv}));
}

TEST_CASE("generalizable: copying the content variable survives style interventions") {
    Scm scm = style_content_model();
    Intervention do_s0, do_s1;
    do_s0.assignments = {{"S", "0"}};
    do_s1.assignments = {{"S", "1"}};
    CHECK(check_generalizable(scm, "C", read_variable(scm, "C"), {do_s0, do_s1}));
}

TEST_CASE("generalizable: leaking the intervened style variable is rejected") {
    Scm scm = style_content_model();
    Intervention do_s0, do_s1;
    do_s0.assignments = {{"S", "0"}};
    do_s1.assignments = {{"S", "1"}};
    // Representation reads X = C xor S: conditioning on z flips meaning with S.
    CHECK_FALSE(check_generalizable(scm, "C", read_variable(scm, "X"), {do_s0, do_s1}));
}

TEST_CASE("style invariance: representation reading only the structure passes") {
    Scm scm = style_content_model();
    Intervention do_s0, do_s1;
    do_s0.assignments = {{"S", "0"}};
    do_s1.assignments = {{"S", "1"}};
    CHECK(check_style_invariance(scm, "C", read_variable(scm, "C"), {do_s0, do_s1}));
}

TEST_CASE("style invariance: structure xor style is rejected") {
    Scm scm = style_content_model();
    Intervention do_s0, do_s1;
    do_s0.assignments = {{"S", "0"}};
    do_s1.assignments = {{"S", "1"}};
    CHECK_FALSE(check_style_invariance(scm, "C", read_variable(scm, "X"), {do_s0, do_s1}));
}

TEST_CASE("style invariance: empty style set passes, assigning structure is rejected") {
    Scm scm = style_content_model();
    CHECK(check_style_invariance(scm, "C", read_variable(scm, "C"), {}));
    Intervention bad;
    bad.assignments = {{"C", "1"}};
    CHECK_THROWS_WITH_AS(check_style_invariance(scm, "C", read_variable(scm, "C"), {bad}),
                         doctest::Contains("invalid-style-intervention"), Error);
}

TEST_CASE("counterfactual invariance: ignoring the attribute and its descendants") {
    Scm scm = style_content_model();
    CHECK(check_counterfactually_invariant(scm, read_variable(scm, "C"), "S"));
}

TEST_CASE("counterfactual invariance: reading the attribute directly fails") {
    Scm scm = style_content_model();
    CHECK_FALSE(check_counterfactually_invariant(scm, read_variable(scm, "S"), "S"));
    // X is a descendant of S, so it fails too.
    CHECK_FALSE(check_counterfactually_invariant(scm, read_variable(scm, "X"), "S"));
}

TEST_CASE("counterfactual invariance: singleton alphabet is vacuous") {
    Scm scm;
    scm.variables.push_back({"Q", symbols(1)});
    scm.variables.push_back({"X", symbols(2)});
    scm.mechanisms.push_back({"Q", {}, {1.0}, {0}});
    scm.mechanisms.push_back({"X", {}, {0.5, 0.5}, {0, 1}});
    CHECK(check_counterfactually_invariant(scm, read_variable(scm, "X"), "Q"));
}
