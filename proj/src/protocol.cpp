#include "semcom/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "semcom/byteio.hpp"
#include "semcom/errors.hpp"

namespace semcom {

const char* to_string(Plane plane) {
    switch (plane) {
        case Plane::user: return "user";
        case Plane::control: return "control";
        case Plane::reasoning: return "reasoning";
    }
    return "?";
}

const char* to_string(MsgKind kind) {
    switch (kind) {
        case MsgKind::representation: return "representation";
        case MsgKind::raw: return "raw";
        case MsgKind::query: return "query";
        case MsgKind::query_answer: return "query_answer";
        case MsgKind::language_shower: return "language_shower";
    }
    return "?";
}

Plane plane_for(MsgKind kind) {
    switch (kind) {
        case MsgKind::query:
        case MsgKind::query_answer: return Plane::control;
        case MsgKind::language_shower: return Plane::reasoning;
        case MsgKind::representation:
        case MsgKind::raw: return Plane::user;
    }
    return Plane::user;
}

long ElementKnowledge::total_cells() const {
    long n = 0;
    for (const auto& mech : cells) n += static_cast<long>(mech.size());
    return n;
}

long ElementKnowledge::known_cells() const {
    long n = 0;
    for (const auto& mech : cells)
        for (const auto& c : mech) n += c.has_value();
    return n;
}

double DidacticsPolicy::raw_fraction(double maturity) const {
    return std::clamp(raw_fraction_scale * (1.0 - maturity), 0.0, 1.0);
}

namespace {

std::uint64_t splitmix(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<ContentElement> sorted_content(std::vector<ContentElement> content) {
    std::sort(content.begin(), content.end(),
              [](const ContentElement& a, const ContentElement& b) { return a.id < b.id; });
    return content;
}

long bits_per_frame(const Scm& scm) {
    long bits = 0;
    for (const auto& v : scm.variables)
        bits += static_cast<long>(
            std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(2, v.alphabet.size())))));
    return bits;
}

long element_content_bits(const ContentElement& e) {
    return e.frames * bits_per_frame(e.ground_truth);
}

Scm skeleton_of(const Scm& truth) {
    Scm s = truth;
    for (auto& m : s.mechanisms) std::fill(m.table.begin(), m.table.end(), 0);
    return s;
}

ElementKnowledge blank_knowledge(const Scm& skeleton) {
    ElementKnowledge k;
    k.structure_known = true;
    k.skeleton = skeleton;
    for (const auto& m : k.skeleton.mechanisms)
        k.cells.emplace_back(m.table.size(), std::nullopt);
    return k;
}

// ---- wire codecs -----------------------------------------------------------

constexpr std::uint8_t kRawStructure = 0;
constexpr std::uint8_t kRawCells = 1;

struct CellRecord {
    std::uint8_t mech = 0;
    std::uint16_t cell = 0;
    std::uint8_t value = 0;
};

Bits encode_structure(const std::string& element, const Scm& truth) {
    ByteWriter w;
    w.u8(kRawStructure);
    Representation skel{element, skeleton_of(truth)};
    Bits body = encode(skel);
    for (std::uint8_t b : body.bytes()) w.u8(b);
    return Bits::from_bytes(w.bytes());
}

// Raw cell payload: subtype, element index, count, then 4-byte records.
Bits encode_cells(std::uint16_t elem_idx, const std::vector<CellRecord>& records) {
    ByteWriter w;
    w.u8(kRawCells);
    w.u16(elem_idx);
    w.u16(static_cast<std::uint16_t>(records.size()));
    for (const auto& r : records) {
        w.u8(r.mech);
        w.u16(r.cell);
        w.u8(r.value);
    }
    return Bits::from_bytes(w.bytes());
}

// Query payload is exactly 64 bits: element, mechanism, cell, level, padding.
Bits encode_query(std::uint16_t elem_idx, std::uint8_t mech, std::uint16_t cell, std::uint8_t level) {
    ByteWriter w;
    w.u16(elem_idx);
    w.u8(mech);
    w.u16(cell);
    w.u8(level);
    w.u16(0);
    return Bits::from_bytes(w.bytes());
}

struct QueryFields {
    std::uint16_t elem_idx;
    std::uint8_t mech;
    std::uint16_t cell;
    std::uint8_t level;
};

QueryFields decode_query(const Bits& bits) {
    ByteReader r(bits.bytes());
    QueryFields q;
    q.elem_idx = r.u16();
    q.mech = r.u8();
    q.cell = r.u16();
    q.level = r.u8();
    (void)r.u16();
    return q;
}

constexpr std::uint8_t kAnswerOk = 0;
constexpr std::uint8_t kAnswerNoSupport = 1;
constexpr std::uint8_t kAnswerError = 2;

Bits encode_answer(const QueryFields& q, std::uint8_t status, const Pmf& pmf) {
    ByteWriter w;
    w.u16(q.elem_idx);
    w.u8(q.mech);
    w.u16(q.cell);
    w.u8(q.level);
    w.u8(status);
    w.u8(static_cast<std::uint8_t>(pmf.p.size()));
    for (double v : pmf.p) w.f64(v);
    return Bits::from_bytes(w.bytes());
}

struct AnswerFields {
    QueryFields query;
    std::uint8_t status = 0;
    Pmf pmf;
};

AnswerFields decode_answer(const Bits& bits) {
    ByteReader r(bits.bytes());
    AnswerFields a;
    a.query.elem_idx = r.u16();
    a.query.mech = r.u8();
    a.query.cell = r.u16();
    a.query.level = r.u8();
    a.status = r.u8();
    std::size_t n = r.u8();
    for (std::size_t i = 0; i < n; ++i) a.pmf.p.push_back(r.f64());
    return a;
}

// Packets whose received bits differ from what was sent (the idealized
// per-packet CRC detection).
std::vector<bool> corrupted_packet_map(const Bits& sent, const Bits& received, long payload_bits) {
    std::size_t packets = (sent.size() + static_cast<std::size_t>(payload_bits) - 1) /
                          static_cast<std::size_t>(payload_bits);
    std::vector<bool> hit(packets, false);
    for (std::size_t i = 0; i < sent.size(); ++i)
        if (sent.get(i) != received.get(i)) hit[i / static_cast<std::size_t>(payload_bits)] = true;
    return hit;
}

}  // namespace

double compute_maturity(const ApprenticeState& a, const std::map<std::string, Scm>& truth) {
    long total = 0, correct = 0;
    for (const auto& [element, scm] : truth) {
        auto it = a.knowledge.find(element);
        for (std::size_t mi = 0; mi < scm.mechanisms.size(); ++mi) {
            const auto& table = scm.mechanisms[mi].table;
            total += static_cast<long>(table.size());
            if (it == a.knowledge.end() || !it->second.structure_known) continue;
            if (mi >= it->second.cells.size()) continue;
            const auto& cells = it->second.cells[mi];
            for (std::size_t ci = 0; ci < table.size() && ci < cells.size(); ++ci)
                if (cells[ci] && *cells[ci] == table[ci]) ++correct;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<Message> compose_didactics(const TeacherState& t, double apprentice_maturity,
                                       const std::vector<ContentElement>& content) {
    auto sorted = sorted_content(content);
    for (const auto& e : sorted)
        if (!t.language.entries.count(e.id))
            fail("uncovered-content", "no language entry for element '" + e.id + "'");

    std::vector<Message> msgs;
    if (t.shower_mode) {
        SemanticLanguage lib;
        lib.model_id = t.language.model_id;
        long total_bits = 0;
        for (const auto& e : sorted) {
            lib.entries[e.id] = t.language.entries.at(e.id);
            total_bits += element_content_bits(e);
        }
        std::string text = serialize_language(lib);
        Message m;
        m.kind = MsgKind::language_shower;
        m.plane = plane_for(m.kind);
        m.payload = Bits::from_bytes(std::vector<std::uint8_t>(text.begin(), text.end()));
        m.content_bits = total_bits;
        msgs.push_back(std::move(m));
        return msgs;
    }

    double fraction = t.policy.raw_fraction(apprentice_maturity);
    for (std::size_t ei = 0; ei < sorted.size(); ++ei) {
        const ContentElement& e = sorted[ei];
        const Scm& truth = t.truth.at(e.id);

        Message rep;
        rep.kind = MsgKind::representation;
        rep.plane = plane_for(rep.kind);
        rep.element = e.id;
        rep.payload = encode(t.language.entries.at(e.id));
        rep.content_bits = element_content_bits(e);
        msgs.push_back(std::move(rep));

        auto bs = t.believed_structure.find(e.id);
        if (bs == t.believed_structure.end() || !bs->second) {
            Message st;
            st.kind = MsgKind::raw;
            st.plane = plane_for(st.kind);
            st.element = e.id;
            st.payload = encode_structure(e.id, truth);
            msgs.push_back(std::move(st));
        }

        // Cells the teacher estimates as unknown, in canonical order.
        std::vector<CellRecord> unknown;
        auto bk = t.believed_known.find(e.id);
        for (std::size_t mi = 0; mi < truth.mechanisms.size(); ++mi) {
            const auto& table = truth.mechanisms[mi].table;
            for (std::size_t ci = 0; ci < table.size(); ++ci) {
                bool known = bk != t.believed_known.end() && mi < bk->second.size() &&
                             ci < bk->second[mi].size() && bk->second[mi][ci];
                if (!known)
                    unknown.push_back({static_cast<std::uint8_t>(mi), static_cast<std::uint16_t>(ci),
                                       static_cast<std::uint8_t>(table[ci])});
            }
        }
        std::size_t n_send = static_cast<std::size_t>(
            std::ceil(fraction * static_cast<double>(unknown.size())));
        if (n_send > 0) {
            unknown.resize(n_send);
            Message raw;
            raw.kind = MsgKind::raw;
            raw.plane = plane_for(raw.kind);
            raw.element = e.id;
            raw.payload = encode_cells(static_cast<std::uint16_t>(ei), unknown);
            msgs.push_back(std::move(raw));
        }
    }
    return msgs;
}

std::vector<Message> pose_queries(const ApprenticeState& a, const std::vector<ContentElement>& content,
                                  double maturity) {
    auto sorted = sorted_content(content);
    int level = maturity < ApprenticeState::kInterventionalThreshold    ? 0
                : maturity < ApprenticeState::kCounterfactualThreshold ? 1
                                                                       : 2;
    // Unknown cells, resolvable mechanisms (deterministic given parents)
    // first, then canonical order.
    struct Target {
        int noisy;
        std::size_t elem_idx, mech, cell;
    };
    std::vector<Target> targets;
    for (std::size_t ei = 0; ei < sorted.size(); ++ei) {
        auto it = a.knowledge.find(sorted[ei].id);
        if (it == a.knowledge.end() || !it->second.structure_known) continue;
        const ElementKnowledge& k = it->second;
        for (std::size_t mi = 0; mi < k.cells.size(); ++mi) {
            int noisy = k.skeleton.mechanisms[mi].noise.size() > 1 ? 1 : 0;
            for (std::size_t ci = 0; ci < k.cells[mi].size(); ++ci)
                if (!k.cells[mi][ci]) targets.push_back({noisy, ei, mi, ci});
        }
    }
    std::stable_sort(targets.begin(), targets.end(), [](const Target& x, const Target& y) {
        return std::tie(x.noisy, x.elem_idx, x.mech, x.cell) <
               std::tie(y.noisy, y.elem_idx, y.mech, y.cell);
    });
    std::vector<Message> out;
    for (const auto& tg : targets) {
        if (static_cast<int>(out.size()) >= a.query_budget) break;
        Message q;
        q.kind = MsgKind::query;
        q.plane = plane_for(q.kind);
        q.element = sorted[tg.elem_idx].id;
        q.payload = encode_query(static_cast<std::uint16_t>(tg.elem_idx),
                                 static_cast<std::uint8_t>(tg.mech),
                                 static_cast<std::uint16_t>(tg.cell), static_cast<std::uint8_t>(level));
        out.push_back(std::move(q));
    }
    return out;
}

namespace {

// Parent assignment symbols for a mechanism table row.
std::map<std::string, std::string> row_parent_assignment(const Scm& scm, const Mechanism& mech,
                                                         std::size_t pa_idx) {
    std::map<std::string, std::string> out;
    std::vector<std::size_t> cards;
    for (const auto& p : mech.parents) cards.push_back(scm.variable(p).alphabet.size());
    for (std::size_t k = mech.parents.size(); k-- > 0;) {
        std::size_t card = cards[k];
        std::size_t sym = pa_idx % card;
        pa_idx /= card;
        out[mech.parents[k]] = scm.variable(mech.parents[k]).alphabet[sym];
    }
    return out;
}

}  // namespace

Message answer_query(const TeacherState& t, const Message& query,
                     const std::vector<ContentElement>& content, std::uint64_t session_seed) {
    auto sorted = sorted_content(content);
    QueryFields q = decode_query(query.payload);
    if (q.elem_idx >= sorted.size()) fail("unknown-variable", "query element index out of range");
    const std::string& element = sorted[q.elem_idx].id;
    const Scm& truth = t.truth.at(element);
    if (q.mech >= truth.mechanisms.size()) fail("unknown-variable", "query mechanism out of range");
    const Mechanism& mech = truth.mechanisms[q.mech];
    std::size_t noise = std::max<std::size_t>(1, mech.noise.size());
    std::size_t pa_idx = q.cell / noise;

    std::uint8_t status = kAnswerOk;
    Pmf pmf;
    auto parents = row_parent_assignment(truth, mech, pa_idx);
    if (q.level == 0) {
        // Associational: observational conditional, defined only on-support.
        auto joint = joint_distribution(truth);
        std::map<std::string, int> evidence;
        for (const auto& [id, sym] : parents) evidence[id] = truth.symbol_index(id, sym);
        auto conditioned = joint.condition(evidence);
        if (conditioned) {
            pmf = conditioned->marginal(mech.target);
        } else {
            status = kAnswerNoSupport;
        }
    } else if (q.level == 1) {
        Intervention iv;
        iv.assignments = parents;
        pmf = interventional_distribution(truth, iv, mech.target);
    } else {
        // Counterfactual against this session's factual world. A rejected
        // factual becomes an error answer rather than a dropped session.
        auto x = sample(truth, splitmix(session_seed, 0xFAC7ull + q.elem_idx));
        CounterfactualQuery cf;
        for (std::size_t i = 0; i < truth.variables.size(); ++i)
            cf.factual[truth.variables[i].id] =
                truth.variables[i].alphabet[static_cast<std::size_t>(x[i])];
        cf.intervention.assignments = parents;
        cf.target = mech.target;
        try {
            pmf = counterfactual(truth, cf);
        } catch (const Error& e) {
            if (e.code() != "impossible-factual") throw;
            status = kAnswerError;
        }
    }

    Message ans;
    ans.kind = MsgKind::query_answer;
    ans.plane = plane_for(ans.kind);
    ans.element = element;
    ans.payload = encode_answer(q, status, pmf);
    return ans;
}

QueryView decode_query_message(const Message& query) {
    QueryFields q = decode_query(query.payload);
    return {q.elem_idx, q.mech, q.cell, q.level};
}

AnswerView decode_answer_message(const Message& answer) {
    AnswerFields a = decode_answer(answer.payload);
    AnswerView view;
    view.query = {a.query.elem_idx, a.query.mech, a.query.cell, a.query.level};
    view.status = a.status;
    view.pmf = a.pmf;
    return view;
}

namespace {

// Folds a decoded answer into the knowledge table. Point-mass associational
// and interventional answers pin every positive-noise cell of the row;
// counterfactual answers pin the row only for noiseless mechanisms.
void apply_answer(ApprenticeState& a, const std::string& element, const AnswerFields& ans) {
    if (ans.status != kAnswerOk) return;
    auto it = a.knowledge.find(element);
    if (it == a.knowledge.end() || !it->second.structure_known) return;
    ElementKnowledge& k = it->second;
    if (ans.query.mech >= k.cells.size()) return;
    const Mechanism& mech = k.skeleton.mechanisms[ans.query.mech];
    std::size_t noise = std::max<std::size_t>(1, mech.noise.size());
    std::size_t pa_idx = ans.query.cell / noise;

    std::optional<std::size_t> point;
    for (std::size_t i = 0; i < ans.pmf.p.size(); ++i)
        if (std::abs(ans.pmf.p[i] - 1.0) <= kDistributionTolerance) point = i;
    if (!point) return;

    for (std::size_t e = 0; e < noise; ++e) {
        bool determinable = noise == 1 || (ans.query.level != 2 && mech.noise[e] > 0);
        if (!determinable) continue;
        std::size_t ci = pa_idx * noise + e;
        if (ci < k.cells[ans.query.mech].size())
            k.cells[ans.query.mech][ci] = static_cast<int>(*point);
    }
}

bool truth_is_deterministic(const Scm& scm) {
    for (const auto& m : scm.mechanisms)
        for (double p : m.noise)
            if (p != 0.0 && p != 1.0) return false;
    return true;
}

// The apprentice's instantiated model: learned cells, defaults elsewhere.
Scm believed_model(const ElementKnowledge& k, long* known, long* guessed) {
    Scm model = k.skeleton;
    for (std::size_t mi = 0; mi < model.mechanisms.size(); ++mi) {
        auto& table = model.mechanisms[mi].table;
        for (std::size_t ci = 0; ci < table.size(); ++ci) {
            if (mi < k.cells.size() && ci < k.cells[mi].size() && k.cells[mi][ci]) {
                table[ci] = *k.cells[mi][ci];
                if (known) ++*known;
            } else {
                table[ci] = 0;
                if (guessed) ++*guessed;
            }
        }
    }
    return model;
}

}  // namespace

RegenResult regenerate(const ApprenticeState& a, const std::vector<ContentElement>& content) {
    auto sorted = sorted_content(content);
    RegenResult out;
    double weighted = 0, weight = 0;
    for (const auto& e : sorted) {
        double w = static_cast<double>(element_content_bits(e));
        weight += w;
        auto it = a.knowledge.find(e.id);
        if (it == a.knowledge.end() || !it->second.structure_known) {
            long cells = 0;
            for (const auto& m : e.ground_truth.mechanisms) cells += static_cast<long>(m.table.size());
            out.cells_guessed += cells;
            continue;  // fidelity contribution 0
        }
        Scm believed = believed_model(it->second, &out.cells_known, &out.cells_guessed);
        double fid;
        if (truth_is_deterministic(e.ground_truth)) {
            auto want = sample(e.ground_truth, 0);
            auto got = sample(believed, 0);
            std::size_t match = 0;
            for (std::size_t i = 0; i < want.size(); ++i) match += want[i] == got[i];
            fid = want.empty() ? 1.0 : static_cast<double>(match) / static_cast<double>(want.size());
            out.regenerated[e.id] = got;
        } else {
            auto truth_joint = joint_distribution(e.ground_truth);
            auto believed_joint = joint_distribution(believed);
            fid = 1.0 - JointPmf::total_variation(truth_joint, believed_joint);
            out.regenerated[e.id] = sample(believed, 0);
        }
        weighted += w * fid;
    }
    out.fidelity = weight > 0 ? weighted / weight : 1.0;
    return out;
}

Representation correct_representation(const ApprenticeState& a, const Bits& corrupted,
                                      const std::vector<std::string>& recent_context) {
    if (a.learned_language.empty()) fail("no-candidates", "the apprentice has no learned entries");
    const Representation* best = nullptr;
    std::size_t best_dist = 0;
    long best_freq = 0;
    for (const auto& [content, rep] : a.learned_language) {
        std::size_t dist = hamming_distance(encode(rep), corrupted);
        long freq = static_cast<long>(std::count(recent_context.begin(), recent_context.end(), content));
        bool better = !best || dist < best_dist ||
                      (dist == best_dist &&
                       (freq > best_freq || (freq == best_freq && rep.id < best->id)));
        if (better) {
            best = &rep;
            best_dist = dist;
            best_freq = freq;
        }
    }
    return *best;
}

void reverse_mentorship(const ApprenticeState& a, TeacherState& t, const std::string& element) {
    auto it = a.learned_language.find(element);
    if (it == a.learned_language.end())
        fail("not-superior", "the apprentice has no entry for '" + element + "'");
    auto existing = t.language.entries.find(element);
    if (existing != t.language.entries.end()) {
        std::size_t theirs = encode(it->second).size();
        std::size_t ours = encode(existing->second).size();
        if (theirs >= ours)
            fail("not-superior", "the apprentice's encoding is not strictly shorter");
    }
    SemanticLanguage updated = t.language;
    updated.entries[element] = it->second;
    check_language(updated);  // adoption must keep the dictionary injective
    t.language = std::move(updated);
}

void data_shower(const SemanticLanguage& library, ApprenticeState& node,
                 const std::map<std::string, Scm>& universe_truth) {
    for (const auto& [element, rep] : library.entries) {
        node.learned_language[element] = rep;
        ElementKnowledge k = blank_knowledge(rep.payload);
        for (std::size_t mi = 0; mi < rep.payload.mechanisms.size(); ++mi)
            for (std::size_t ci = 0; ci < rep.payload.mechanisms[mi].table.size(); ++ci)
                k.cells[mi][ci] = rep.payload.mechanisms[mi].table[ci];
        k.last_clean_rep = encode(rep);
        node.knowledge[element] = std::move(k);
    }
    node.maturity = compute_maturity(node, universe_truth);
}

KnowledgeGainReport knowledge_gain(const ApprenticeState& before, const ApprenticeState& after,
                                   const std::map<std::string, Scm>& truth) {
    auto correct = [&](const ApprenticeState& state, const std::string& element, std::size_t mi,
                       std::size_t ci, int want) {
        auto it = state.knowledge.find(element);
        if (it == state.knowledge.end() || !it->second.structure_known) return false;
        if (mi >= it->second.cells.size() || ci >= it->second.cells[mi].size()) return false;
        const auto& cell = it->second.cells[mi][ci];
        return cell.has_value() && *cell == want;
    };
    KnowledgeGainReport report;
    for (const auto& [element, scm] : truth)
        for (std::size_t mi = 0; mi < scm.mechanisms.size(); ++mi)
            for (std::size_t ci = 0; ci < scm.mechanisms[mi].table.size(); ++ci) {
                int want = scm.mechanisms[mi].table[ci];
                if (!correct(before, element, mi, ci, want) && correct(after, element, mi, ci, want))
                    ++report.cells;
            }
    for (const auto& [element, rep] : after.learned_language)
        if (!before.learned_language.count(element)) ++report.new_entries;
    report.is_semantically_rich = report.cells + report.new_entries > 0;
    return report;
}

SessionResult run_session(TeacherState& t, ApprenticeState& a, const ChannelConfig& cfg,
                          const std::vector<ContentElement>& content, std::uint64_t seed) {
    validate_config(cfg);
    if (content.empty()) fail("invalid-argument", "session needs at least one content element");
    auto sorted = sorted_content(content);
    for (const auto& e : sorted)
        if (!t.truth.count(e.id)) fail("unknown-variable", "teacher lacks truth for '" + e.id + "'");

    SessionResult result;
    result.trace.session_id = t.next_session_id++;
    ApprenticeState before = a;
    result.maturity_before = compute_maturity(a, t.truth);

    std::uint64_t counter = 0;
    auto next_seed = [&] { return splitmix(seed, counter++); };
    double rate = cfg.effective_symbol_rate();
    auto account = [&](Message& m, const TransmissionCost& cost) {
        m.session_id = result.trace.session_id;
        m.packets = cost.packets;
        m.corrupted_packets = cost.corrupted_packets;
        result.trace.duration_s += rate > 0 ? static_cast<double>(cost.packets) / rate : 0.0;
    };
    std::vector<std::string> context_ids;
    for (const auto& e : sorted) context_ids.push_back(e.id);

    // Didactics cross the channel.
    auto didactics = compose_didactics(t, result.maturity_before, sorted);
    for (Message& m : didactics) {
        auto [received, cost] = transmit(m.payload, cfg, next_seed());
        account(m, cost);
        switch (m.kind) {
            case MsgKind::representation: {
                result.trace.reps_sent += 1;
                Bits usable = received;
                bool usable_ok = cost.corrupted_packets == 0;
                if (!usable_ok && !a.learned_language.empty()) {
                    Representation fixed = correct_representation(a, received, context_ids);
                    auto mine = a.learned_language.find(m.element);
                    if (mine != a.learned_language.end() && mine->second == fixed) {
                        usable = encode(fixed);
                        usable_ok = true;
                    }
                }
                if (!usable_ok) break;
                if (cost.corrupted_packets == 0 && a.knowledge.count(m.element))
                    a.knowledge[m.element].last_clean_rep = usable;
                // A known entry makes the payload fully decodable: refresh the
                // mechanism cells from it.
                if (a.learned_language.count(m.element)) {
                    Representation rep = decode(usable);
                    ElementKnowledge k = blank_knowledge(rep.payload);
                    for (std::size_t mi = 0; mi < rep.payload.mechanisms.size(); ++mi)
                        for (std::size_t ci = 0; ci < rep.payload.mechanisms[mi].table.size(); ++ci)
                            k.cells[mi][ci] = rep.payload.mechanisms[mi].table[ci];
                    k.last_clean_rep = usable;
                    a.knowledge[m.element] = std::move(k);
                }
                break;
            }
            case MsgKind::raw: {
                result.trace.nu += cost.packets;
                if (received.bytes().empty()) break;
                std::uint8_t subtype = m.payload.bytes()[0];
                if (subtype == kRawStructure) {
                    if (cost.corrupted_packets > 0) break;  // checksum failed, resent next session
                    std::vector<std::uint8_t> body(received.bytes().begin() + 1, received.bytes().end());
                    Representation skel = decode(Bits::from_bytes(body));
                    if (!a.knowledge.count(m.element) || !a.knowledge[m.element].structure_known)
                        a.knowledge[m.element] = blank_knowledge(skel.payload);
                } else if (subtype == kRawCells) {
                    auto it = a.knowledge.find(m.element);
                    if (it == a.knowledge.end() || !it->second.structure_known) break;
                    auto hit = corrupted_packet_map(m.payload, received, cfg.payload_bits);
                    ByteReader r(m.payload.bytes());
                    (void)r.u8();
                    (void)r.u16();
                    std::size_t ncells = r.u16();
                    for (std::size_t i = 0; i < ncells; ++i) {
                        CellRecord rec;
                        rec.mech = r.u8();
                        rec.cell = r.u16();
                        rec.value = r.u8();
                        // Record i spans bits [40 + 32 i, 72 + 32 i).
                        std::size_t first_packet =
                            (40 + 32 * i) / static_cast<std::size_t>(cfg.payload_bits);
                        std::size_t last_packet =
                            (71 + 32 * i) / static_cast<std::size_t>(cfg.payload_bits);
                        bool dropped = false;
                        for (std::size_t p = first_packet; p <= last_packet && p < hit.size(); ++p)
                            dropped = dropped || hit[p];
                        if (dropped) continue;
                        if (rec.mech < it->second.cells.size() &&
                            rec.cell < it->second.cells[rec.mech].size())
                            it->second.cells[rec.mech][rec.cell] = rec.value;
                    }
                }
                break;
            }
            case MsgKind::language_shower: {
                if (cost.corrupted_packets > 0) break;
                const auto& bytes = received.bytes();
                SemanticLanguage lib = parse_language(std::string(bytes.begin(), bytes.end()));
                data_shower(lib, a, t.truth);
                break;
            }
            default: break;
        }
        result.messages.push_back(m);
    }

    // Regeneration fidelity reflects what the didactics delivered.
    RegenResult regen = regenerate(a, sorted);
    result.trace.fidelity = regen.fidelity;

    // Queries climb the ladder; answers land before the next session.
    double mid_maturity = compute_maturity(a, t.truth);
    auto queries = pose_queries(a, sorted, mid_maturity);
    for (Message& q : queries) {
        auto [received_q, cost_q] = transmit(q.payload, cfg, next_seed());
        account(q, cost_q);
        result.trace.zeta += cost_q.packets;
        result.messages.push_back(q);
        if (cost_q.corrupted_packets > 0) continue;  // checksum failed, no answer

        Message ans = answer_query(t, q, sorted, seed);
        auto [received_a, cost_a] = transmit(ans.payload, cfg, next_seed());
        account(ans, cost_a);
        result.messages.push_back(ans);
        if (cost_a.corrupted_packets > 0) continue;
        apply_answer(a, ans.element, decode_answer(received_a));
    }

    // Ground language entries once an element's cells are complete.
    for (const auto& e : sorted) {
        auto it = a.knowledge.find(e.id);
        if (it == a.knowledge.end() || !it->second.structure_known) continue;
        if (a.learned_language.count(e.id)) continue;
        if (it->second.known_cells() == it->second.total_cells() &&
            it->second.last_clean_rep.size() > 0)
            a.learned_language[e.id] = decode(it->second.last_clean_rep);
    }

    // Control-plane feedback: the teacher's estimate tracks actual knowledge.
    for (const auto& [element, k] : a.knowledge) {
        t.believed_structure[element] = k.structure_known;
        auto& bk = t.believed_known[element];
        bk.assign(k.cells.size(), {});
        for (std::size_t mi = 0; mi < k.cells.size(); ++mi) {
            bk[mi].assign(k.cells[mi].size(), false);
            for (std::size_t ci = 0; ci < k.cells[mi].size(); ++ci)
                bk[mi][ci] = k.cells[mi][ci].has_value();
        }
    }

    result.maturity_after = compute_maturity(a, t.truth);
    a.maturity = result.maturity_after;
    result.trace.knowledge_gain = knowledge_gain(before, a, t.truth).cells;
    for (const auto& e : sorted) result.trace.content_bits += element_content_bits(e);
    return result;
}

SemanticLanguage build_language(const std::map<std::string, Scm>& truth) {
    SemanticLanguage lang;
    for (const auto& [element, scm] : truth) {
        Representation rep;
        rep.id = "z_" + element;
        rep.payload = scm;
        lang.entries[element] = rep;
    }
    check_language(lang);
    return lang;
}

}  // namespace semcom
