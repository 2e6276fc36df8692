#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semcom/bits.hpp"
#include "semcom/channel.hpp"
#include "semcom/mdl.hpp"
#include "semcom/scm.hpp"

namespace semcom {

enum class Plane { user, control, reasoning };
enum class MsgKind { representation, raw, query, query_answer, language_shower };

const char* to_string(Plane plane);
const char* to_string(MsgKind kind);

/// The plane a kind must travel on: queries and answers ride the control
/// plane, representations and raw complements the user plane, language
/// showers the reasoning plane.
Plane plane_for(MsgKind kind);

struct Message {
    Plane plane = Plane::user;
    MsgKind kind = MsgKind::raw;
    int session_id = 0;
    std::string element;   // addressed content element ("" for showers)
    Bits payload;
    long content_bits = 0;  // content this message regenerates (rep/shower rows)

    // Filled in after the message crosses the channel.
    long packets = 0;
    long corrupted_packets = 0;

    std::size_t payload_bits() const { return payload.size(); }
};

/// A semantic content element: its id, the ground-truth model that generates
/// it, and how many frames (full samples) one session's stream carries.
struct ContentElement {
    std::string id;
    Scm ground_truth;
    long frames = 1;
};

/// The apprentice's per-element mechanism estimate: the structural skeleton
/// (variables, alphabets, parents, noise pmfs) plus per-cell table knowledge.
struct ElementKnowledge {
    bool structure_known = false;
    Scm skeleton;  // tables hold placeholders until cells are learned
    std::vector<std::vector<std::optional<int>>> cells;  // per mechanism, per table cell
    Bits last_clean_rep;  // most recent uncorrupted representation encoding

    long total_cells() const;
    long known_cells() const;
};

struct ApprenticeState {
    std::map<std::string, ElementKnowledge> knowledge;
    std::map<std::string, Representation> learned_language;
    int query_budget = 4;
    double maturity = 0.0;

    /// Highest-uncertainty-first maturity thresholds for the query ladder.
    static constexpr double kInterventionalThreshold = 0.3;
    static constexpr double kCounterfactualThreshold = 0.7;
};

struct DidacticsPolicy {
    /// Raw complement fraction is scale * (1 - maturity), clamped to [0, 1].
    double raw_fraction_scale = 0.9;

    double raw_fraction(double maturity) const;
};

struct TeacherState {
    std::map<std::string, Scm> truth;
    SemanticLanguage language;
    DidacticsPolicy policy;
    double lambda = 1.0;
    bool shower_mode = false;
    int next_session_id = 1;

    /// Control-plane estimate of what the apprentice already knows.
    std::map<std::string, std::vector<std::vector<bool>>> believed_known;
    std::map<std::string, bool> believed_structure;
};

struct SessionTrace {
    int session_id = 0;
    long reps_sent = 0;
    long nu = 0;       // raw-data packets from the teacher
    long zeta = 0;     // query packets from the apprentice
    double duration_s = 0.0;
    double fidelity = 0.0;
    long knowledge_gain = 0;  // table cells newly correct
    long content_bits = 0;
};

struct SessionResult {
    SessionTrace trace;
    std::vector<Message> messages;
    double maturity_before = 0.0;
    double maturity_after = 0.0;
};

struct KnowledgeGainReport {
    long cells = 0;
    long new_entries = 0;
    bool is_semantically_rich = false;
};

/// Fraction of ground-truth table cells the apprentice knows correctly,
/// over every element of the truth universe.
double compute_maturity(const ApprenticeState& a, const std::map<std::string, Scm>& truth);

/// Builds one session's didactics: each element's encoded representation plus
/// raw complement for the estimated-unknown cells (fraction set by the
/// policy at the given maturity). In shower mode the whole language ships as
/// one reasoning-plane message instead.
std::vector<Message> compose_didactics(const TeacherState& t, double apprentice_maturity,
                                       const std::vector<ContentElement>& content);

/// Up to query_budget control-plane queries targeting the apprentice's
/// unknown cells; the query level climbs the causal ladder with maturity.
std::vector<Message> pose_queries(const ApprenticeState& a, const std::vector<ContentElement>& content,
                                  double maturity);

/// Answers one query from the ground truth: associational queries with the
/// observational conditional, interventional with the mutilated model,
/// counterfactual with abduction/action/prediction.
Message answer_query(const TeacherState& t, const Message& query,
                     const std::vector<ContentElement>& content, std::uint64_t session_seed);

/// Decoded views of control-plane payloads (indices refer to the sorted
/// content order of the session).
struct QueryView {
    std::size_t element_index = 0;
    std::size_t mechanism = 0;
    std::size_t cell = 0;
    int level = 0;  // 0 associational, 1 interventional, 2 counterfactual
};

struct AnswerView {
    QueryView query;
    int status = 0;  // 0 ok, 1 no-support, 2 rejected query
    Pmf pmf;
};

QueryView decode_query_message(const Message& query);
AnswerView decode_answer_message(const Message& answer);

/// What the apprentice regenerates and how faithful it is. Deterministic
/// content scores by exact-match fraction, stochastic content by one minus
/// the total-variation distance between the believed and true models.
struct RegenResult {
    double fidelity = 0.0;
    std::map<std::string, std::vector<int>> regenerated;  // per element, one frame
    long cells_known = 0;    // table cells backing the regeneration
    long cells_guessed = 0;  // default-filled unknown cells
};

RegenResult regenerate(const ApprenticeState& a, const std::vector<ContentElement>& content);

/// Knowledge-based error correction: nearest learned encoding by Hamming
/// distance; ties prefer recently seen content, then lexicographic id.
Representation correct_representation(const ApprenticeState& a, const Bits& corrupted,
                                      const std::vector<std::string>& recent_context);

/// The apprentice supplies a strictly better (shorter) representation, or one
/// the teacher lacks; anything else is rejected as not-superior.
void reverse_mentorship(const ApprenticeState& a, TeacherState& t, const std::string& element);

/// Bulk library offload: entries and the corresponding knowledge cells are
/// overwritten from the library payloads; maturity is recomputed against the
/// given truth universe.
void data_shower(const SemanticLanguage& library, ApprenticeState& node,
                 const std::map<std::string, Scm>& universe_truth);

KnowledgeGainReport knowledge_gain(const ApprenticeState& before, const ApprenticeState& after,
                                   const std::map<std::string, Scm>& truth);

/// One full didactics/query/answer exchange across the channel. Deterministic
/// per seed. Corrupted user-plane payloads degrade delivery (dropped cells,
/// representation correction); corrupted control-plane exchanges teach
/// nothing. The channel never aborts a session.
SessionResult run_session(TeacherState& t, ApprenticeState& a, const ChannelConfig& cfg,
                          const std::vector<ContentElement>& content, std::uint64_t seed);

/// Builds the teacher's dictionary for the given elements: representation ids
/// are derived from element ids, payloads are the ground-truth models.
SemanticLanguage build_language(const std::map<std::string, Scm>& truth);

}  // namespace semcom
