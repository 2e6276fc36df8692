#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "semcom/errors.hpp"
#include "semcom/protocol.hpp"
#include "test_util.hpp"

using namespace semcom;
using testutil::symbols;

namespace {

// k independent one-cell variables, all truth-valued 1 (so default guesses miss).
ContentElement constants_element(const std::string& id, int k, long frames = 4) {
    ContentElement e;
    e.id = id;
    e.frames = frames;
    for (int i = 0; i < k; ++i) {
        std::string vid = "x" + std::to_string(i);
        e.ground_truth.variables.push_back({vid, symbols(2)});
        e.ground_truth.mechanisms.push_back({vid, {}, {1.0}, {1}});
    }
    return e;
}

// A chain with a noisy root: u0 ~ Bern(0.25 grid), x0 = u0, x1 = f(x0), x2 = g(x0, x1).
ContentElement chain_element(const std::string& id, long frames = 4) {
    ContentElement e;
    e.id = id;
    e.frames = frames;
    Scm& scm = e.ground_truth;
    scm.variables.push_back({"u0", symbols(2)});
    scm.mechanisms.push_back({"u0", {}, {0.75, 0.25}, {0, 1}});
    scm.variables.push_back({"x0", symbols(2)});
    scm.mechanisms.push_back({"x0", {"u0"}, {1.0}, {0, 1}});
    scm.variables.push_back({"x1", symbols(2)});
    scm.mechanisms.push_back({"x1", {"x0"}, {1.0}, {1, 0}});
    scm.variables.push_back({"x2", symbols(2)});
    scm.mechanisms.push_back({"x2", {"x0", "x1"}, {1.0}, {0, 1, 1, 1}});
    return e;
}

TeacherState teacher_for(const std::vector<ContentElement>& content) {
    TeacherState t;
    for (const auto& e : content) t.truth[e.id] = e.ground_truth;
    t.language = build_language(t.truth);
    return t;
}

ChannelConfig clean_channel(long payload = 64) {
    ChannelConfig cfg;
    cfg.bandwidth_w = 1000;
    cfg.sinr_gamma = 3;
    cfg.payload_bits = payload;
    return cfg;
}

}  // namespace

TEST_CASE("plane discipline is fixed by the message kind") {
    CHECK(plane_for(MsgKind::query) == Plane::control);
    CHECK(plane_for(MsgKind::query_answer) == Plane::control);
    CHECK(plane_for(MsgKind::representation) == Plane::user);
    CHECK(plane_for(MsgKind::raw) == Plane::user);
    CHECK(plane_for(MsgKind::language_shower) == Plane::reasoning);
}

TEST_CASE("didactics at maturity zero carry the policy fraction of cells") {
    auto content = std::vector<ContentElement>{constants_element("a", 10)};
    TeacherState t = teacher_for(content);
    auto msgs = compose_didactics(t, 0.0, content);
    // representation + structure + raw cells
    REQUIRE(msgs.size() == 3);
    CHECK(msgs[0].kind == MsgKind::representation);
    CHECK(msgs[1].kind == MsgKind::raw);
    CHECK(msgs[2].kind == MsgKind::raw);
    // 10 unknown cells, fraction 0.9 -> 9 records of 4 bytes after a 5-byte header
    CHECK(msgs[2].payload.size() == 8 * (5 + 4 * 9));
}

TEST_CASE("didactics at maturity one are representations only") {
    auto content = std::vector<ContentElement>{constants_element("a", 10)};
    TeacherState t = teacher_for(content);
    t.believed_structure["a"] = true;
    auto msgs = compose_didactics(t, 1.0, content);
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].kind == MsgKind::representation);
}

TEST_CASE("shower mode emits one reasoning-plane message with the dictionary") {
    auto content = std::vector<ContentElement>{constants_element("a", 4), constants_element("b", 4)};
    TeacherState t = teacher_for(content);
    t.shower_mode = true;
    auto msgs = compose_didactics(t, 0.0, content);
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].kind == MsgKind::language_shower);
    CHECK(msgs[0].plane == Plane::reasoning);
    const auto& bytes = msgs[0].payload.bytes();
    SemanticLanguage lib = parse_language(std::string(bytes.begin(), bytes.end()));
    CHECK(lib.entries.size() == 2);
}

TEST_CASE("didactics reject uncovered content") {
    auto content = std::vector<ContentElement>{constants_element("a", 4)};
    TeacherState t = teacher_for(content);
    t.language.entries.clear();
    CHECK_THROWS_WITH_AS(compose_didactics(t, 0.0, content), doctest::Contains("uncovered-content"),
                         Error);
}

TEST_CASE("a mature apprentice needs no raw data and regenerates exactly") {
    auto content = std::vector<ContentElement>{chain_element("a")};
    TeacherState t = teacher_for(content);
    ApprenticeState a;
    data_shower(t.language, a, t.truth);  // instant mastery
    REQUIRE(a.maturity == doctest::Approx(1.0));
    t.believed_structure["a"] = true;
    auto& believed = t.believed_known["a"];
    for (const auto& m : content[0].ground_truth.mechanisms)
        believed.push_back(std::vector<bool>(m.table.size(), true));

    auto res = run_session(t, a, clean_channel(), content, 7);
    CHECK(res.trace.nu == 0);
    CHECK(res.trace.fidelity == doctest::Approx(1.0));
    CHECK(res.trace.zeta == 0);
}

TEST_CASE("blank apprentice with no queries reaches exactly the raw coverage") {
    // Ten independent cells, policy 0.9 -> nine delivered, fidelity 9/10.
    auto content = std::vector<ContentElement>{constants_element("a", 10)};
    TeacherState t = teacher_for(content);
    ApprenticeState a;
    a.query_budget = 0;
    auto res = run_session(t, a, clean_channel(), content, 3);
    CHECK(res.trace.zeta == 0);
    CHECK(res.trace.fidelity == doctest::Approx(0.9));
}

TEST_CASE("three stationary sessions: raw packets strictly decrease") {
    auto content = std::vector<ContentElement>{chain_element("a")};
    TeacherState t = teacher_for(content);
    t.policy.raw_fraction_scale = 0.5;
    ApprenticeState a;
    a.query_budget = 0;
    ChannelConfig cfg = clean_channel(32);
    long prev = -1;
    for (int session = 0; session < 3; ++session) {
        auto res = run_session(t, a, cfg, content, 100 + static_cast<std::uint64_t>(session));
        if (prev >= 0) CHECK(res.trace.nu < prev);
        prev = res.trace.nu;
    }
}

TEST_CASE("maturity never decreases over an error-free link") {
    auto content = std::vector<ContentElement>{chain_element("a"), constants_element("b", 6)};
    TeacherState t = teacher_for(content);
    ApprenticeState a;
    double prev = 0.0;
    for (int session = 0; session < 6; ++session) {
        auto res = run_session(t, a, clean_channel(), content, 40 + static_cast<std::uint64_t>(session));
        CHECK(res.maturity_after >= prev - 1e-12);
        prev = res.maturity_after;
        for (const auto& m : res.messages) CHECK(m.plane == plane_for(m.kind));
    }
    CHECK(prev == doctest::Approx(1.0));
}

TEST_CASE("identical seeds produce identical sessions") {
    auto content = std::vector<ContentElement>{chain_element("a")};
    auto run_once = [&] {
        TeacherState t = teacher_for(content);
        ApprenticeState a;
        std::vector<std::string> log;
        for (int session = 0; session < 3; ++session) {
            auto res = run_session(t, a, clean_channel(), content, 1234);
            for (const auto& m : res.messages)
                log.push_back(std::string(to_string(m.kind)) + ":" + m.payload.to_hex() + ":" +
                              std::to_string(m.packets));
            log.push_back("fid=" + std::to_string(res.trace.fidelity));
        }
        return log;
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("queries stay within budget and escalate with maturity") {
    auto content = std::vector<ContentElement>{constants_element("a", 10)};
    ApprenticeState a;
    CHECK(pose_queries(a, content, 0.0).empty());  // no structure yet

    // Install structure with everything unknown.
    TeacherState t = teacher_for(content);
    ApprenticeState b;
    b.query_budget = 0;
    (void)run_session(t, b, clean_channel(), content, 1);  // delivers structure + raw

    b.query_budget = 2;
    auto queries = pose_queries(b, content, 0.5);
    REQUIRE(queries.size() <= 2);
    for (const auto& q : queries) {
        CHECK(q.kind == MsgKind::query);
        CHECK(q.payload.size() == 64);
        CHECK(q.payload.bytes()[5] == 1);  // interventional level
    }
    auto low = pose_queries(b, content, 0.1);
    for (const auto& q : low) CHECK(q.payload.bytes()[5] == 0);
    auto high = pose_queries(b, content, 0.9);
    for (const auto& q : high) CHECK(q.payload.bytes()[5] == 2);
}

TEST_CASE("answers follow the causal ladder") {
    // Y = X xor eps with p(eps=1) = 0.1, carried as one content element.
    ContentElement e;
    e.id = "a";
    e.frames = 2;
    e.ground_truth = testutil::xor_chain_scm(0.5, 0.1);
    auto content = std::vector<ContentElement>{e};
    TeacherState t = teacher_for(content);

    // Everything known except the (X=1, eps=0) cell of Y.
    ApprenticeState a;
    data_shower(t.language, a, t.truth);
    a.knowledge["a"].cells[1][2] = std::nullopt;
    a.query_budget = 1;

    auto queries = pose_queries(a, content, 0.5);  // interventional band
    REQUIRE(queries.size() == 1);
    QueryView qv = decode_query_message(queries[0]);
    CHECK(qv.level == 1);
    CHECK(qv.mechanism == 1);
    CHECK(qv.cell == 2);

    Message ans = answer_query(t, queries[0], content, 77);
    AnswerView av = decode_answer_message(ans);
    CHECK(av.status == 0);
    // p(Y | do(X=1)) mixes the noise: {0.1, 0.9}
    REQUIRE(av.pmf.p.size() == 2);
    CHECK(av.pmf.p[1] == doctest::Approx(0.9));

    // Associational answer on a root is its marginal.
    a.knowledge["a"].cells[0][1] = std::nullopt;
    auto root_query = pose_queries(a, content, 0.1);
    REQUIRE_FALSE(root_query.empty());
    AnswerView root_ans = decode_answer_message(answer_query(t, root_query[0], content, 77));
    CHECK(root_ans.status == 0);
    CHECK(root_ans.pmf.p[0] == doctest::Approx(0.5));
}

TEST_CASE("queries on unreachable rows are answered with a rejection") {
    // x0 is the constant 0, so the row x0 = 1 of x1 has no observational support.
    ContentElement e;
    e.id = "a";
    e.frames = 1;
    e.ground_truth.variables.push_back({"x0", symbols(2)});
    e.ground_truth.mechanisms.push_back({"x0", {}, {1.0}, {0}});
    e.ground_truth.variables.push_back({"x1", symbols(2)});
    e.ground_truth.mechanisms.push_back({"x1", {"x0"}, {1.0}, {1, 0}});
    auto content = std::vector<ContentElement>{e};
    TeacherState t = teacher_for(content);
    ApprenticeState a;
    data_shower(t.language, a, t.truth);
    a.knowledge["a"].cells[1][1] = std::nullopt;  // the x0 = 1 row
    a.query_budget = 1;

    auto queries = pose_queries(a, content, 0.1);  // associational band
    REQUIRE(queries.size() == 1);
    AnswerView av = decode_answer_message(answer_query(t, queries[0], content, 3));
    CHECK(av.status == 1);

    // The interventional ladder level reaches the same row just fine.
    auto do_queries = pose_queries(a, content, 0.5);
    REQUIRE(do_queries.size() == 1);
    AnswerView dv = decode_answer_message(answer_query(t, do_queries[0], content, 3));
    CHECK(dv.status == 0);
    REQUIRE(dv.pmf.p.size() == 2);
    CHECK(dv.pmf.p[0] == doctest::Approx(1.0));
}

TEST_CASE("no queries are posed once everything is known") {
    auto content = std::vector<ContentElement>{constants_element("a", 5)};
    TeacherState t = teacher_for(content);
    ApprenticeState a;
    data_shower(t.language, a, t.truth);
    a.query_budget = 8;
    CHECK(pose_queries(a, content, 1.0).empty());
}

TEST_CASE("interventional answers resolve cells that didactics left open") {
    auto content = std::vector<ContentElement>{chain_element("a")};
    TeacherState t = teacher_for(content);
    t.policy.raw_fraction_scale = 0.3;  // deliberately stingy raw complement
    ApprenticeState a;
    a.query_budget = 16;
    double maturity = 0;
    for (int session = 0; session < 4; ++session) {
        auto res = run_session(t, a, clean_channel(), content, 900 + static_cast<std::uint64_t>(session));
        maturity = res.maturity_after;
        if (maturity == 1.0) break;
    }
    CHECK(maturity == doctest::Approx(1.0));
}

TEST_CASE("raw complement covering the unknown half restores full fidelity") {
    auto content = std::vector<ContentElement>{constants_element("a", 10)};
    TeacherState t = teacher_for(content);
    // Policy saturates at maturity 0.5 so one didactic covers everything left.
    t.policy.raw_fraction_scale = 2.0;
    ApprenticeState a;
    a.query_budget = 0;
    // Half the cells pre-learned, teacher estimate in sync.
    ElementKnowledge k;
    k.structure_known = true;
    k.skeleton = t.truth.at("a");
    for (auto& m : k.skeleton.mechanisms) std::fill(m.table.begin(), m.table.end(), 0);
    auto& believed = t.believed_known["a"];
    t.believed_structure["a"] = true;
    for (std::size_t mi = 0; mi < t.truth.at("a").mechanisms.size(); ++mi) {
        bool known = mi < 5;
        k.cells.emplace_back(1, known ? std::optional<int>(t.truth.at("a").mechanisms[mi].table[0])
                                      : std::nullopt);
        believed.push_back({known});
    }
    a.knowledge["a"] = std::move(k);
    REQUIRE(compute_maturity(a, t.truth) == doctest::Approx(0.5));

    auto res = run_session(t, a, clean_channel(), content, 11);
    CHECK(res.trace.fidelity == doctest::Approx(1.0));
}

TEST_CASE("regeneration from complete knowledge is exact") {
    auto content = std::vector<ContentElement>{constants_element("a", 6)};
    TeacherState t = teacher_for(content);
    ApprenticeState a;
    data_shower(t.language, a, t.truth);
    auto regen = regenerate(a, content);
    CHECK(regen.fidelity == doctest::Approx(1.0));
    CHECK(regen.cells_guessed == 0);
}

TEST_CASE("zero knowledge regenerates at chance level on average") {
    std::mt19937_64 rng(5150);
    double total = 0;
    const int trials = 300;
    for (int trial = 0; trial < trials; ++trial) {
        ContentElement e;
        e.id = "a";
        e.frames = 1;
        // one four-symbol variable with a random constant table
        e.ground_truth.variables.push_back({"x0", symbols(4)});
        e.ground_truth.mechanisms.push_back(
            {"x0", {}, {1.0}, {static_cast<int>(rng() % 4)}});
        ApprenticeState a;
        ElementKnowledge k;
        k.structure_known = true;
        k.skeleton = e.ground_truth;
        std::fill(k.skeleton.mechanisms[0].table.begin(), k.skeleton.mechanisms[0].table.end(), 0);
        k.cells.emplace_back(1, std::nullopt);
        a.knowledge["a"] = k;
        total += regenerate(a, {e}).fidelity;
    }
    CHECK(total / trials == doctest::Approx(0.25).epsilon(0.25));
}

TEST_CASE("hamming correction recovers a single flipped bit") {
    auto content = std::vector<ContentElement>{chain_element("a"), constants_element("b", 3)};
    TeacherState t = teacher_for(content);
    ApprenticeState a;
    data_shower(t.language, a, t.truth);
    Bits encoded = encode(t.language.entries.at("a"));
    Bits corrupted = encoded;
    corrupted.set(17, !corrupted.get(17));
    Representation fixed = correct_representation(a, corrupted, {"a"});
    CHECK(fixed == t.language.entries.at("a"));

    // Uncorrupted bits come back unchanged.
    CHECK(correct_representation(a, encoded, {}) == t.language.entries.at("a"));
}

TEST_CASE("correction ties prefer the recent context") {
    // Two entries whose encodings differ from the probe by the same distance.
    Scm tiny;
    tiny.variables.push_back({"x0", symbols(2)});
    tiny.mechanisms.push_back({"x0", {}, {1.0}, {0}});
    // ASCII 'a' and 'c' differ in exactly one bit, as do the tables.
    Representation ra{"za", tiny};
    Scm tiny2 = tiny;
    tiny2.mechanisms[0].table = {1};
    Representation rb{"zc", tiny2};
    ApprenticeState a;
    a.learned_language["a"] = ra;
    a.learned_language["c"] = rb;
    Bits ea = encode(ra);
    Bits eb = encode(rb);
    REQUIRE(hamming_distance(ea, eb) == 2);
    // A probe halfway between them: flip one of the two differing bits of ea.
    Bits probe = ea;
    std::size_t flip = 0;
    for (std::size_t i = 0; i < ea.size(); ++i)
        if (ea.get(i) != eb.get(i)) {
            flip = i;
            break;
        }
    probe.set(flip, !probe.get(flip));
    REQUIRE(hamming_distance(probe, ea) == hamming_distance(probe, eb));
    CHECK(correct_representation(a, probe, {"c"}) == rb);
    CHECK(correct_representation(a, probe, {"a"}) == ra);
    // No context: lexicographic representation id wins.
    CHECK(correct_representation(a, probe, {}) == ra);
}

TEST_CASE("correction without any learned entries is rejected") {
    ApprenticeState a;
    CHECK_THROWS_WITH_AS(correct_representation(a, Bits::from_string("1010"), {}),
                         doctest::Contains("no-candidates"), Error);
}

TEST_CASE("reverse mentorship adopts shorter or missing entries only") {
    auto content = std::vector<ContentElement>{constants_element("a", 8)};
    TeacherState t = teacher_for(content);
    ApprenticeState a;

    // Teacher lacks the entry entirely.
    Scm tiny;
    tiny.variables.push_back({"x0", symbols(2)});
    tiny.mechanisms.push_back({"x0", {}, {1.0}, {1}});
    a.learned_language["c"] = {"zc", tiny};
    reverse_mentorship(a, t, "c");
    CHECK(t.language.entries.count("c"));

    // Strictly shorter encoding replaces the teacher's.
    a.learned_language["a"] = {"za_short", tiny};
    REQUIRE(encode(a.learned_language["a"]).size() < encode(t.language.entries.at("a")).size());
    reverse_mentorship(a, t, "a");
    CHECK(t.language.entries.at("a").id == "za_short");

    // Equal length is not superior.
    ApprenticeState b;
    b.learned_language["a"] = t.language.entries.at("a");
    CHECK_THROWS_WITH_AS(reverse_mentorship(b, t, "a"), doctest::Contains("not-superior"), Error);
}

TEST_CASE("data shower grants exactly the covered knowledge") {
    auto content = std::vector<ContentElement>{constants_element("a", 5), constants_element("b", 5)};
    TeacherState t = teacher_for(content);

    ApprenticeState full;
    data_shower(t.language, full, t.truth);
    CHECK(full.maturity == doctest::Approx(1.0));

    ApprenticeState none;
    SemanticLanguage empty;
    data_shower(empty, none, t.truth);
    CHECK(none.maturity == doctest::Approx(0.0));
    CHECK(none.learned_language.empty());

    ApprenticeState half;
    SemanticLanguage partial;
    partial.entries["a"] = t.language.entries.at("a");
    data_shower(partial, half, t.truth);
    CHECK(half.maturity == doctest::Approx(0.5));
}

TEST_CASE("knowledge gain counts new cells and entries") {
    auto content = std::vector<ContentElement>{constants_element("a", 5)};
    TeacherState t = teacher_for(content);
    ApprenticeState before;
    CHECK_FALSE(knowledge_gain(before, before, t.truth).is_semantically_rich);

    ApprenticeState after = before;
    ElementKnowledge k;
    k.structure_known = true;
    k.skeleton = t.truth.at("a");
    for (const auto& m : k.skeleton.mechanisms) k.cells.emplace_back(m.table.size(), std::nullopt);
    k.cells[0][0] = t.truth.at("a").mechanisms[0].table[0];
    after.knowledge["a"] = k;
    auto gain = knowledge_gain(before, after, t.truth);
    CHECK(gain.cells == 1);
    CHECK(gain.is_semantically_rich);
}

TEST_CASE("shower sessions reach full fidelity in one pass") {
    auto content = std::vector<ContentElement>{chain_element("a")};
    TeacherState t = teacher_for(content);
    t.shower_mode = true;
    ApprenticeState a;
    auto res = run_session(t, a, clean_channel(), content, 5);
    CHECK(res.trace.nu == 0);
    CHECK(res.maturity_after == doctest::Approx(1.0));
    CHECK(res.trace.fidelity == doctest::Approx(1.0));
    bool saw_shower = false;
    for (const auto& m : res.messages)
        if (m.kind == MsgKind::language_shower) saw_shower = true;
    CHECK(saw_shower);
}

TEST_CASE("noisy channels can only slow the apprentice down, not corrupt it") {
    auto content = std::vector<ContentElement>{chain_element("a")};
    ChannelConfig cfg = clean_channel();
    cfg.bit_error_prob = 0.001;
    TeacherState t = teacher_for(content);
    ApprenticeState a;
    a.query_budget = 16;
    double prev = 0;
    for (int session = 0; session < 20; ++session) {
        auto res = run_session(t, a, cfg, content, 3000 + static_cast<std::uint64_t>(session));
        // Knowledge is never unlearned even when packets corrupt: dropped
        // cells simply arrive later.
        CHECK(res.maturity_after >= prev - 1e-12);
        prev = res.maturity_after;
    }
    CHECK(prev == doctest::Approx(1.0));
}
