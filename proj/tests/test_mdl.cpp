#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "semcom/errors.hpp"
#include "semcom/mdl.hpp"
#include "test_util.hpp"

using namespace semcom;

namespace {

std::vector<std::string> reps8() {
    std::vector<std::string> out;
    for (int i = 0; i < 8; ++i) out.push_back("z" + std::to_string(i));
    return out;
}

// Pairs drawn from k distinct inputs mapped injectively into reps8.
std::vector<ScoredPair> mapped_pairs(int k, int copies) {
    std::vector<ScoredPair> pairs;
    for (int c = 0; c < copies; ++c)
        for (int i = 0; i < k; ++i) pairs.push_back({"x" + std::to_string(i), "z" + std::to_string(i)});
    return pairs;
}

std::map<std::string, std::string> mapping(int k) {
    std::map<std::string, std::string> m;
    for (int i = 0; i < k; ++i) m["x" + std::to_string(i)] = "z" + std::to_string(i);
    return m;
}

// Three-member family with strictly increasing K and strictly decreasing loss:
// uniform (cheap, lossy), partial lookup (middle), full lookup (big, lossless).
ModelFamily staircase_family() {
    ModelFamily fam;
    fam.members.push_back(make_uniform_model("uni", reps8()));
    std::map<std::string, std::string> partial = mapping(2);
    fam.members.push_back(make_lookup_model("half", partial, reps8()));
    fam.members.push_back(make_lookup_model("full", mapping(4), reps8()));
    return fam;
}

std::vector<ScoredPair> staircase_pairs() { return mapped_pairs(4, 8); }

}  // namespace

TEST_CASE("cross entropy of a perfect model is zero") {
    auto m = make_lookup_model("m", mapping(4), reps8());
    CHECK(cross_entropy_loss(*m, mapped_pairs(4, 3)) == doctest::Approx(0.0));
}

TEST_CASE("four half-probability pairs cost four bits") {
    auto m = make_uniform_model("u2", {"a", "b"});
    std::vector<ScoredPair> pairs(4, {"x", "a"});
    CHECK(cross_entropy_loss(*m, pairs) == doctest::Approx(4.0));
}

TEST_CASE("uniform over eight representations, ten pairs, thirty bits") {
    auto m = make_uniform_model("u8", reps8());
    std::vector<ScoredPair> pairs(10, {"x", "z3"});
    CHECK(cross_entropy_loss(*m, pairs) == doctest::Approx(30.0));
}

TEST_CASE("zero probability pairs are rejected") {
    auto m = make_constant_model("c", "a");
    CHECK_THROWS_WITH_AS(cross_entropy_loss(*m, {{"x", "b"}}), doctest::Contains("zero-probability-pair"),
                         Error);
}

TEST_CASE("minimal constant model has the documented length") {
    // header (magic, version, kind) + two empty length-prefixed strings
    auto m = make_constant_model("", "");
    CHECK(description_length_bits(*m) == kModelHeaderBits + 2 * 16);
}

TEST_CASE("one extra table row costs exactly the row bits") {
    auto base = make_lookup_model("m", mapping(2), reps8());
    auto bigger = make_lookup_model("m", mapping(3), reps8());
    // Every key is "xN" and every value "zN": a row is two length-prefixed
    // 2-byte strings.
    long row_bits = 2 * (16 + 16);
    CHECK(description_length_bits(*bigger) == description_length_bits(*base) + row_bits);
}

TEST_CASE("description length is deterministic") {
    auto a = make_lookup_model("m", mapping(3), reps8());
    auto b = make_lookup_model("m", mapping(3), reps8());
    CHECK(description_length_bits(*a) == description_length_bits(*b));
    CHECK(a->serialize() == b->serialize());
}

TEST_CASE("language complexity of a lone perfect model is its description length") {
    ModelFamily fam;
    fam.members.push_back(make_lookup_model("perfect", mapping(4), reps8()));
    auto report = language_complexity(fam, mapped_pairs(4, 5));
    CHECK(report.loss == doctest::Approx(0.0));
    CHECK(report.gamma == doctest::Approx(static_cast<double>(report.k)));
    CHECK(report.chosen_model == "perfect");
}

TEST_CASE("a cheap uniform model can beat a perfect one") {
    // 50 pairs under uniform-over-2 cost 50 bits; the lookup table for 25
    // distinct inputs costs far more than 50 + K(uniform) bits.
    ModelFamily fam;
    std::map<std::string, std::string> table;
    std::vector<std::string> reps{"a", "b"};
    std::vector<ScoredPair> pairs;
    for (int i = 0; i < 50; ++i) {
        std::string input = "in" + std::to_string(i / 2);
        std::string rep = i % 2 ? "a" : "b";
        pairs.push_back({input, rep});
    }
    for (int i = 0; i < 25; ++i) table["in" + std::to_string(i)] = "a";
    fam.members.push_back(make_lookup_model("perfectish", table, reps));
    fam.members.push_back(make_uniform_model("uniform2", reps));
    auto uni_k = description_length_bits(*fam.members[1]);
    auto report = language_complexity(fam, pairs);
    CHECK(report.chosen_model == "uniform2");
    CHECK(report.gamma == doctest::Approx(static_cast<double>(uni_k) + 50.0));
}

TEST_CASE("pure noise flags memorize-instead: the cheapest uniform wins") {
    ModelFamily fam = staircase_family();
    // Pairs that no lookup row predicts: inputs outside every table.
    std::vector<ScoredPair> noise;
    for (int i = 0; i < 32; ++i) noise.push_back({"noise" + std::to_string(i), reps8()[i % 8]});
    auto report = language_complexity(fam, noise);
    CHECK(report.chosen_model == "uni");
    CHECK(report.loss == doctest::Approx(32.0 * 3.0));
}

TEST_CASE("structure function filters by budget then minimizes") {
    ModelFamily fam = staircase_family();
    auto pairs = staircase_pairs();
    long k_uni = description_length_bits(*fam.members[0]);
    long k_half = description_length_bits(*fam.members[1]);
    long k_full = description_length_bits(*fam.members[2]);
    REQUIRE(k_uni < k_half);
    REQUIRE(k_half < k_full);

    double loss_uni = cross_entropy_loss(*fam.members[0], pairs);
    double loss_half = cross_entropy_loss(*fam.members[1], pairs);
    CHECK(structure_function(fam, pairs, k_full) == doctest::Approx(0.0));
    CHECK(structure_function(fam, pairs, (k_half + k_full) / 2) == doctest::Approx(loss_half));
    CHECK(structure_function(fam, pairs, k_uni) == doctest::Approx(loss_uni));
    CHECK_THROWS_WITH_AS(structure_function(fam, pairs, k_uni - 8),
                         doctest::Contains("budget-infeasible"), Error);
}

TEST_CASE("structure function is non-increasing in the budget") {
    ModelFamily fam = staircase_family();
    auto pairs = staircase_pairs();
    long k_max = 0;
    for (const auto& m : fam.members)
        k_max = std::max(k_max, description_length_bits(*m));
    double prev = std::numeric_limits<double>::infinity();
    for (long t = description_length_bits(*fam.members[0]); t <= k_max + 16; t += 8) {
        double psi = structure_function(fam, pairs, t);
        CHECK(psi <= prev + 1e-12);
        prev = psi;
    }
}

TEST_CASE("structure function is zero at and beyond the memorizer's K") {
    ModelFamily fam = staircase_family();
    auto pairs = staircase_pairs();
    long k_memorizer = description_length_bits(*fam.members[2]);  // loss 0 on the pairs
    for (long t = k_memorizer; t <= k_memorizer + 64; t += 8)
        CHECK(structure_function(fam, pairs, t) == doctest::Approx(0.0));
}

TEST_CASE("lagrangian endpoints pick the loss and K minimizers") {
    ModelFamily fam = staircase_family();
    auto pairs = staircase_pairs();
    CHECK(lagrangian_complexity(fam, pairs, 0.0).chosen_model == "full");
    CHECK(lagrangian_complexity(fam, pairs, 1e9).chosen_model == "uni");
}

TEST_CASE("lambda = 1 lagrangian equals the language complexity") {
    ModelFamily fam = staircase_family();
    auto pairs = staircase_pairs();
    auto a = language_complexity(fam, pairs);
    auto b = lagrangian_complexity(fam, pairs, 1.0);
    CHECK(a.gamma == doctest::Approx(b.gamma));
    CHECK(a.chosen_model == b.chosen_model);
}

TEST_CASE("gamma_lambda is concave and non-decreasing in lambda") {
    ModelFamily fam = staircase_family();
    auto pairs = staircase_pairs();
    std::vector<double> grid;
    for (double l = 0.0; l <= 4.0; l += 0.25) grid.push_back(l);
    double prev = -1;
    std::vector<double> gamma;
    for (double l : grid) {
        gamma.push_back(lagrangian_complexity(fam, pairs, l).gamma);
        CHECK(gamma.back() >= prev - 1e-9);
        prev = gamma.back();
    }
    for (std::size_t i = 1; i + 1 < gamma.size(); ++i)
        CHECK(gamma[i] >= 0.5 * (gamma[i - 1] + gamma[i + 1]) - 1e-9);
}

TEST_CASE("legendre consistency holds on the staircase family") {
    CHECK(legendre_consistency(staircase_family(), staircase_pairs(), {0.1, 1.0, 10.0}));
}

TEST_CASE("legendre consistency is trivial on a singleton family") {
    ModelFamily fam;
    fam.members.push_back(make_uniform_model("uni", reps8()));
    CHECK(legendre_consistency(fam, staircase_pairs(), {0.5, 2.0}));
}

TEST_CASE("a corrupted structure-function cache breaks legendre consistency") {
    ModelFamily fam = staircase_family();
    auto pairs = staircase_pairs();
    auto psi = structure_function_profile(fam, pairs);
    CHECK(legendre_consistency_with_profile(fam, pairs, {0.1, 1.0, 10.0}, psi));
    psi.begin()->second *= 0.5;  // fault injection
    CHECK_FALSE(legendre_consistency_with_profile(fam, pairs, {0.1, 1.0, 10.0}, psi));
}

namespace {

// Scales a member's description length by an exact integer factor.
class ScaledKModel final : public ConditionalModel {
public:
    ScaledKModel(ModelPtr inner, int factor) : inner_(std::move(inner)), factor_(factor) {}
    const std::string& id() const override { return inner_->id(); }
    double prob(const std::string& input, const std::string& rep) const override {
        return inner_->prob(input, rep);
    }
    std::vector<std::uint8_t> serialize() const override {
        auto bytes = inner_->serialize();
        std::vector<std::uint8_t> out;
        for (int i = 0; i < factor_; ++i) out.insert(out.end(), bytes.begin(), bytes.end());
        return out;
    }

private:
    ModelPtr inner_;
    int factor_;
};

}  // namespace

TEST_CASE("argmin is stable under joint rescaling of K and lambda") {
    ModelFamily fam = staircase_family();
    auto pairs = staircase_pairs();
    const int c = 3;
    ModelFamily scaled;
    for (const auto& m : fam.members) scaled.members.push_back(std::make_shared<ScaledKModel>(m, c));
    for (double lambda : {0.05, 0.3, 1.0, 5.0}) {
        auto orig = lagrangian_complexity(fam, pairs, lambda);
        auto resc = lagrangian_complexity(scaled, pairs, lambda / c);
        CHECK(orig.chosen_model == resc.chosen_model);
    }
}

TEST_CASE("representation encoding round-trips") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        Representation rep;
        rep.id = "rep" + std::to_string(trial);
        rep.payload = testutil::random_scm(rng, 4, 4);
        Bits bits = encode(rep);
        CHECK(bits.size() > 0);
        Representation back = decode(bits);
        CHECK(back == rep);
    }
}

TEST_CASE("payloads differing in one table entry encode differently") {
    std::mt19937_64 rng(7);
    Representation rep;
    rep.id = "r";
    rep.payload = testutil::random_scm(rng, 3, 3);
    Representation other = rep;
    auto& table = other.payload.mechanisms.back().table;
    table.back() = table.back() == 0 ? 1 : 0;
    CHECK(encode(rep) != encode(other));
}

TEST_CASE("truncated bit strings are rejected") {
    Representation rep;
    rep.id = "r";
    rep.payload = testutil::bernoulli_scm("X", 0.5);
    Bits bits = encode(rep);
    Bits truncated;
    for (std::size_t i = 0; i + 8 < bits.size(); ++i) truncated.push_back(bits.get(i));
    CHECK_THROWS_WITH_AS(decode(truncated), doctest::Contains("malformed-bits"), Error);
}

TEST_CASE("language dictionary round-trips through its text form") {
    std::mt19937_64 rng(123);
    SemanticLanguage lang;
    lang.model_id = "chosen";
    for (int i = 0; i < 4; ++i) {
        Representation rep;
        rep.id = "z" + std::to_string(i);
        rep.payload = testutil::random_scm(rng, 3, 3);
        lang.entries["e" + std::to_string(i)] = rep;
    }
    std::string text = serialize_language(lang);
    SemanticLanguage back = parse_language(text);
    CHECK(back.model_id == lang.model_id);
    REQUIRE(back.entries.size() == lang.entries.size());
    for (const auto& [content, rep] : lang.entries) CHECK(back.entries.at(content) == rep);
    CHECK(serialize_language(back) == text);
}

TEST_CASE("duplicate representation ids are rejected") {
    SemanticLanguage lang;
    Representation rep;
    rep.id = "same";
    rep.payload = testutil::bernoulli_scm("X", 0.5);
    lang.entries["a"] = rep;
    lang.entries["b"] = rep;
    CHECK_THROWS_WITH_AS(check_language(lang), doctest::Contains("duplicate-representation"), Error);
}
