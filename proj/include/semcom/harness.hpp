#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/kpi.hpp"
#include "semcom/protocol.hpp"
#include "semcom/splitter.hpp"

namespace semcom {

/// Scenario file schema (versioned nested key-value; see load_scenario).
struct Scenario {
    int schema = 1;
    std::uint64_t seed = 1;
    int sessions = 1;

    // content spec
    int elements = 1;
    int variables = 2;
    int alphabet = 2;
    double noise_level = 0.0;
    long frames = 64;

    ChannelConfig channel;
    double omega = 1.0;
    double lambda = 1.0;
    double theta = kDefaultSplitTheta;
    std::size_t window = kDefaultSplitWindow;
    double gamma_cap = 0.0;  // 0 disables the resplit pass
    int query_budget = 4;
    double raw_fraction_scale = 0.9;
    long filler_symbols = 0;

    bool shower = false;
    bool reverse_mentorship_mode = false;
    bool baseline_only = false;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);
/// Throws config-error on any violated invariant.
void validate_scenario(const Scenario& s);

/// Random acyclic models in explicit-noise form: noisy variables read a
/// dedicated exogenous root, every other mechanism is deterministic.
/// Deterministic per seed; every model passes validate().
std::vector<ContentElement> generate_truth(const Scenario& s, std::uint64_t seed);

struct SessionReport {
    SessionTrace trace;
    KpiRecord kpi;
    double maturity = 0.0;
    long stream_bits = 0;
    long learnable_bits = 0;
    long memorizable_bits = 0;
    long xm_packets = 0;
    long semantic_packets = 0;  // every semantic-path packet incl. X_m
    long baseline_packets = 0;
    std::string split_text;    // serialized SplitResult for this session
    std::vector<Message> messages;
};

struct RunReport {
    Scenario scenario;
    std::string version;
    std::vector<SessionReport> sessions;
    KpiRecord aggregate;
    TransmissionCost baseline_total;
    long semantic_packets_total = 0;
    long reverse_adoptions = 0;  // entries the teacher took over from the apprentice
    double final_fidelity = 0.0;
    double final_maturity = 0.0;
    bool semantic_dominates = false;  // fewer packets than baseline at the end
    std::vector<std::string> regime_timeline;
    std::string language_text;  // final dictionary in the semlang format
};

RunReport run_experiment(const Scenario& scenario);

/// Writes trace.csv, kpi.csv, summary.json and the scenario echo; writes are
/// atomic (write-then-rename) and byte-identical across reruns.
void export_report(const RunReport& report, const std::string& out_dir);

/// Reconstructs per-session traces from an exported trace.csv (the standalone
/// KPI analyzer path); durations come from packet counts and the configured
/// symbol rate.
std::vector<SessionTrace> traces_from_csv(const std::string& path, const ChannelConfig& cfg);

}  // namespace semcom
