#include "semcom/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "semcom/errors.hpp"
#include "semcom/kv.hpp"

namespace semcom {

namespace {

std::uint64_t splitmix(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

long bits_per_symbol(int alphabet) {
    return static_cast<long>(std::ceil(std::log2(static_cast<double>(std::max(2, alphabet)))));
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    kv::Node root = kv::parse(text);
    Scenario s;
    const kv::Node* header = root.find("scenario");
    if (!header || header->values.empty())
        fail("config-error", "missing 'scenario <schema>' header");
    s.schema = static_cast<int>(kv::parse_number(header->values[0]));
    if (s.schema != 1) fail("config-error", "unsupported scenario schema");
    s.seed = static_cast<std::uint64_t>(root.get_int("seed", 1));
    s.sessions = static_cast<int>(root.get_int("sessions", 1));
    if (const kv::Node* c = root.find("content")) {
        s.elements = static_cast<int>(c->get_int("elements", s.elements));
        s.variables = static_cast<int>(c->get_int("variables", s.variables));
        s.alphabet = static_cast<int>(c->get_int("alphabet", s.alphabet));
        s.noise_level = c->get_num("noise_level", s.noise_level);
        s.frames = c->get_int("frames", s.frames);
    }
    if (const kv::Node* c = root.find("channel")) {
        s.channel.bandwidth_w = c->get_num("bandwidth_w", s.channel.bandwidth_w);
        s.channel.sinr_gamma = c->get_num("sinr_gamma", s.channel.sinr_gamma);
        s.channel.payload_bits = c->get_int("payload_bits", s.channel.payload_bits);
        s.channel.bit_error_prob = c->get_num("bit_error_prob", s.channel.bit_error_prob);
        s.channel.symbol_rate = c->get_num("symbol_rate", s.channel.symbol_rate);
    }
    s.omega = root.get_num("omega", s.omega);
    s.lambda = root.get_num("lambda", s.lambda);
    s.theta = root.get_num("theta", s.theta);
    s.window = static_cast<std::size_t>(root.get_int("window", static_cast<long long>(s.window)));
    s.gamma_cap = root.get_num("gamma_cap", s.gamma_cap);
    s.query_budget = static_cast<int>(root.get_int("query_budget", s.query_budget));
    if (const kv::Node* d = root.find("didactics"))
        s.raw_fraction_scale = d->get_num("raw_fraction_scale", s.raw_fraction_scale);
    s.filler_symbols = root.get_int("filler_symbols", s.filler_symbols);
    if (const kv::Node* m = root.find("modes")) {
        s.shower = m->get_bool("shower", s.shower);
        s.reverse_mentorship_mode = m->get_bool("reverse_mentorship", s.reverse_mentorship_mode);
        s.baseline_only = m->get_bool("baseline_only", s.baseline_only);
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open scenario file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
    kv::Node root;
    root.block = true;
    auto leaf = [](const std::string& key, const std::string& value) {
        kv::Node n;
        n.key = key;
        n.values = {value};
        return n;
    };
    root.children.push_back(leaf("scenario", std::to_string(s.schema)));
    root.children.push_back(leaf("seed", std::to_string(s.seed)));
    root.children.push_back(leaf("sessions", std::to_string(s.sessions)));
    kv::Node content;
    content.key = "content";
    content.block = true;
    content.children.push_back(leaf("elements", std::to_string(s.elements)));
    content.children.push_back(leaf("variables", std::to_string(s.variables)));
    content.children.push_back(leaf("alphabet", std::to_string(s.alphabet)));
    content.children.push_back(leaf("noise_level", kv::format_number(s.noise_level)));
    content.children.push_back(leaf("frames", std::to_string(s.frames)));
    root.children.push_back(content);
    kv::Node channel;
    channel.key = "channel";
    channel.block = true;
    channel.children.push_back(leaf("bandwidth_w", kv::format_number(s.channel.bandwidth_w)));
    channel.children.push_back(leaf("sinr_gamma", kv::format_number(s.channel.sinr_gamma)));
    channel.children.push_back(leaf("payload_bits", std::to_string(s.channel.payload_bits)));
    channel.children.push_back(leaf("bit_error_prob", kv::format_number(s.channel.bit_error_prob)));
    channel.children.push_back(leaf("symbol_rate", kv::format_number(s.channel.symbol_rate)));
    root.children.push_back(channel);
    root.children.push_back(leaf("omega", kv::format_number(s.omega)));
    root.children.push_back(leaf("lambda", kv::format_number(s.lambda)));
    root.children.push_back(leaf("theta", kv::format_number(s.theta)));
    root.children.push_back(leaf("window", std::to_string(s.window)));
    root.children.push_back(leaf("gamma_cap", kv::format_number(s.gamma_cap)));
    root.children.push_back(leaf("query_budget", std::to_string(s.query_budget)));
    kv::Node didactics;
    didactics.key = "didactics";
    didactics.block = true;
    didactics.children.push_back(leaf("raw_fraction_scale", kv::format_number(s.raw_fraction_scale)));
    root.children.push_back(didactics);
    root.children.push_back(leaf("filler_symbols", std::to_string(s.filler_symbols)));
    kv::Node modes;
    modes.key = "modes";
    modes.block = true;
    modes.children.push_back(leaf("shower", s.shower ? "true" : "false"));
    modes.children.push_back(leaf("reverse_mentorship", s.reverse_mentorship_mode ? "true" : "false"));
    modes.children.push_back(leaf("baseline_only", s.baseline_only ? "true" : "false"));
    root.children.push_back(modes);
    return kv::write(root);
}

void validate_scenario(const Scenario& s) {
    if (s.sessions < 1) fail("config-error", "sessions must be positive");
    if (s.elements < 1) fail("config-error", "elements must be positive");
    if (s.variables < 1) fail("config-error", "variables must be positive");
    if (s.alphabet < 2 || s.alphabet > 16)
        fail("config-error", "alphabet must lie in [2, 16]");
    if (s.noise_level < 0 || s.noise_level > 1)
        fail("config-error", "noise_level must lie in [0, 1]");
    if (s.frames < 1) fail("config-error", "frames must be positive");
    if (s.omega < 0) fail("config-error", "omega must be nonnegative");
    if (s.lambda < 0) fail("config-error", "lambda must be nonnegative");
    if (s.theta <= 0) fail("config-error", "theta must be positive");
    if (s.window < 4) fail("config-error", "window must be at least 4");
    if (s.query_budget < 0) fail("config-error", "query_budget must be nonnegative");
    if (s.raw_fraction_scale < 0 || s.raw_fraction_scale > 1)
        fail("config-error", "raw_fraction_scale must lie in [0, 1]");
    if (s.filler_symbols < 0) fail("config-error", "filler_symbols must be nonnegative");
    validate_config(s.channel);
}

std::vector<ContentElement> generate_truth(const Scenario& s, std::uint64_t seed) {
    static const char* digits = "0123456789abcdef";
    std::vector<ContentElement> out;
    for (int ei = 0; ei < s.elements; ++ei) {
        std::mt19937_64 rng(splitmix(seed, static_cast<std::uint64_t>(ei)));
        auto randint = [&](int lo, int hi) {
            return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
        };
        ContentElement e;
        e.id = "e" + std::to_string(ei);
        e.frames = s.frames;
        Scm& scm = e.ground_truth;
        std::vector<std::string> alphabet;
        for (int a = 0; a < s.alphabet; ++a) alphabet.emplace_back(1, digits[a]);

        std::vector<std::string> content_vars;
        for (int vi = 0; vi < s.variables; ++vi) {
            std::string id = "x" + std::to_string(vi);
            bool noisy = (static_cast<double>(rng() % 1000) / 1000.0) < s.noise_level;
            std::vector<std::string> parents;
            int npar = std::min(vi, 2);
            std::vector<std::string> pool = content_vars;
            for (int k = 0; k < npar; ++k) {
                int pick = randint(0, static_cast<int>(pool.size()) - 1);
                parents.push_back(pool[static_cast<std::size_t>(pick)]);
                pool.erase(pool.begin() + pick);
            }
            if (noisy) {
                // Dedicated exogenous root; dyadic pmf keeps the sum exact.
                std::string eps_id = "u" + std::to_string(vi);
                int grid = randint(64, 192);
                double p0 = static_cast<double>(grid) / 256.0;
                scm.variables.push_back({eps_id, {alphabet[0], alphabet[1]}});
                scm.mechanisms.push_back({eps_id, {}, {p0, 1.0 - p0}, {0, 1}});
                parents.push_back(eps_id);
            }
            scm.variables.push_back({id, alphabet});
            Mechanism m;
            m.target = id;
            m.parents = parents;
            m.noise = {1.0};
            std::size_t pa_states = 1;
            for (const auto& p : m.parents)
                pa_states *= scm.variable(p).alphabet.size();
            for (std::size_t c = 0; c < pa_states; ++c)
                m.table.push_back(randint(0, s.alphabet - 1));
            scm.mechanisms.push_back(std::move(m));
            content_vars.push_back(id);
        }
        ensure_valid(scm);
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

struct SessionStream {
    Datastream stream;
    std::map<std::string, std::pair<std::size_t, std::size_t>> element_spans;  // offset, length
};

// Content segments interleaved with seeded random filler.
SessionStream build_session_stream(const std::vector<ContentElement>& elements, const Scenario& s,
                                   std::uint64_t stream_seed) {
    SessionStream out;
    out.stream.alphabet_size = s.alphabet;
    std::mt19937_64 filler_rng(splitmix(stream_seed, 0xF111ull));
    auto push_filler = [&](long count) {
        for (long i = 0; i < count; ++i)
            out.stream.symbols.push_back(
                static_cast<int>(filler_rng() % static_cast<std::uint64_t>(s.alphabet)));
    };
    for (std::size_t ei = 0; ei < elements.size(); ++ei) {
        const ContentElement& e = elements[ei];
        std::size_t begin = out.stream.symbols.size();
        for (long f = 0; f < e.frames; ++f) {
            auto frame = sample(e.ground_truth, splitmix(stream_seed, 0xABCDull + ei * 4096 +
                                                                          static_cast<std::uint64_t>(f)));
            for (int sym : frame) out.stream.symbols.push_back(sym);
        }
        std::size_t len = out.stream.symbols.size() - begin;
        out.stream.source_tags.push_back({begin, len, e.id});
        out.element_spans[e.id] = {begin, len};
        if (s.filler_symbols > 0) push_filler(s.filler_symbols);
    }
    return out;
}

Bits symbols_to_bits(const std::vector<int>& symbols, std::size_t begin, std::size_t end,
                     int alphabet) {
    long width = bits_per_symbol(alphabet);
    Bits bits;
    for (std::size_t i = begin; i < end; ++i)
        for (long b = width - 1; b >= 0; --b)
            bits.push_back((static_cast<unsigned>(symbols[i]) >> b) & 1u);
    return bits;
}

// The MDL model choice for the language over (element id -> representation id)
// pairs: a perfect lookup versus the cheapest uniform coder.
ComplexityReport select_language_model(SemanticLanguage& language, double lambda) {
    std::vector<ScoredPair> pairs;
    std::map<std::string, std::string> table;
    std::vector<std::string> reps;
    for (const auto& [content, rep] : language.entries) {
        pairs.push_back({content, rep.id});
        table[content] = rep.id;
        reps.push_back(rep.id);
    }
    ModelFamily family;
    family.members.push_back(make_lookup_model("dictionary", table, reps));
    family.members.push_back(make_uniform_model("uniform", reps));
    ComplexityReport report = lagrangian_complexity(family, pairs, lambda);
    language.model_id = report.chosen_model;
    return report;
}

}  // namespace

RunReport run_experiment(const Scenario& scenario) {
    validate_scenario(scenario);
    RunReport report;
    report.scenario = scenario;
    report.version = SEMCOM_VERSION;

    auto elements = generate_truth(scenario, scenario.seed);
    std::map<std::string, Scm> truth;
    for (const auto& e : elements) truth[e.id] = e.ground_truth;

    TeacherState teacher;
    teacher.truth = truth;
    teacher.language = build_language(truth);
    teacher.policy.raw_fraction_scale = scenario.raw_fraction_scale;
    teacher.lambda = scenario.lambda;
    teacher.shower_mode = scenario.shower;
    ComplexityReport language_report = select_language_model(teacher.language, scenario.lambda);

    ApprenticeState apprentice;
    apprentice.query_budget = scenario.query_budget;

    const ChannelConfig& cfg = scenario.channel;
    long sym_bits = bits_per_symbol(scenario.alphabet);
    std::vector<SessionTrace> traces;

    for (int session = 1; session <= scenario.sessions; ++session) {
        std::uint64_t stream_seed = splitmix(scenario.seed, 1000ull + static_cast<std::uint64_t>(session));
        SessionStream ss = build_session_stream(elements, scenario, stream_seed);
        long stream_bits = static_cast<long>(ss.stream.symbols.size()) * sym_bits;

        SessionReport sr;
        sr.stream_bits = stream_bits;

        // Classical baseline: the whole stream crosses the bit pipe.
        auto [base_recv, base_cost] =
            transmit(symbols_to_bits(ss.stream.symbols, 0, ss.stream.symbols.size(), scenario.alphabet),
                     cfg, splitmix(scenario.seed, 4000ull + static_cast<std::uint64_t>(session)));
        (void)base_recv;
        sr.baseline_packets = base_cost.packets;
        report.baseline_total += base_cost;

        if (scenario.baseline_only) {
            sr.kpi.c_c = shannon_capacity(cfg);
            sr.kpi.c_t = sr.kpi.c_c;
            sr.memorizable_bits = stream_bits;
            report.sessions.push_back(std::move(sr));
            continue;
        }

        // Learnable/memorizable split drives the routing.
        auto family = build_stream_family(ss.stream);
        SplitResult split_result = split(ss.stream, family, scenario.window, scenario.theta);
        if (scenario.gamma_cap > 0)
            split_result =
                resplit_on_high_complexity(ss.stream, split_result, language_report, scenario.gamma_cap);

        sr.split_text = serialize_split(split_result);
        auto learnable_at = [&](std::size_t pos) {
            for (const auto& seg : split_result.segments)
                if (pos >= seg.offset && pos < seg.offset + seg.length) return seg.learnable;
            return false;
        };
        std::vector<ContentElement> semantic_elements;
        for (const auto& e : elements) {
            auto [off, len] = ss.element_spans.at(e.id);
            std::size_t learnable_syms = 0;
            for (std::size_t i = off; i < off + len; ++i) learnable_syms += learnable_at(i);
            if (learnable_syms * 2 >= len) semantic_elements.push_back(e);
        }
        sr.learnable_bits = static_cast<long>(split_result.learnable_symbols()) * sym_bits;
        sr.memorizable_bits =
            static_cast<long>(ss.stream.symbols.size() - split_result.learnable_symbols()) * sym_bits;

        // Semantic path.
        if (!semantic_elements.empty()) {
            SessionResult res = run_session(teacher, apprentice, cfg, semantic_elements,
                                            splitmix(scenario.seed, 2000ull + static_cast<std::uint64_t>(session)));
            res.trace.session_id = session;
            for (auto& m : res.messages) {
                m.session_id = session;
                sr.semantic_packets += m.packets;
            }
            sr.trace = res.trace;
            sr.messages = std::move(res.messages);
        } else {
            sr.trace.session_id = session;
            sr.trace.fidelity = 1.0;  // everything rode the classical path
        }

        // X_m and unrouted content cross the classical path.
        std::size_t memorizable_syms = ss.stream.symbols.size() - split_result.learnable_symbols();
        if (memorizable_syms > 0) {
            Bits xm;
            for (const auto& seg : split_result.segments) {
                if (seg.learnable) continue;
                Bits part = symbols_to_bits(ss.stream.symbols, seg.offset, seg.offset + seg.length,
                                            scenario.alphabet);
                xm.append(part);
            }
            auto [xm_recv, xm_cost] =
                transmit(xm, cfg, splitmix(scenario.seed, 3000ull + static_cast<std::uint64_t>(session)));
            (void)xm_recv;
            sr.xm_packets = xm_cost.packets;
            sr.semantic_packets += xm_cost.packets;
        }

        // Mature apprentices may hand terser vocabulary back to the teacher.
        if (scenario.reverse_mentorship_mode) {
            std::size_t index = 0;
            for (const auto& [element, rep] : apprentice.learned_language) {
                Representation candidate = rep;
                candidate.id = "q" + std::to_string(index++);
                if (encode(candidate).size() <
                    encode(teacher.language.entries.at(element)).size()) {
                    apprentice.learned_language[element] = candidate;
                    reverse_mentorship(apprentice, teacher, element);
                    ++report.reverse_adoptions;
                }
            }
        }

        sr.maturity = apprentice.maturity;
        traces.push_back(sr.trace);
        double eta_rate = 0.0;
        double total_duration = 0.0;
        for (const auto& t : traces) total_duration += t.duration_s;
        if (total_duration > 0) eta_rate = eta_per_second(traces, cfg);
        sr.kpi = kpi_record(sr.trace, cfg, scenario.omega, eta_rate);
        report.regime_timeline.push_back(to_string(sr.kpi.regime));
        report.sessions.push_back(std::move(sr));
    }

    if (!scenario.baseline_only) report.language_text = serialize_language(teacher.language);
    if (!report.sessions.empty()) {
        const SessionReport& last = report.sessions.back();
        report.final_fidelity = last.trace.fidelity;
        report.final_maturity = last.maturity;
        report.aggregate = last.kpi;
        if (!scenario.baseline_only) {
            SessionTrace agg;
            agg.session_id = 0;
            for (const auto& sr : report.sessions) {
                agg.reps_sent += sr.trace.reps_sent;
                agg.nu += sr.trace.nu;
                agg.zeta += sr.trace.zeta;
                agg.duration_s += sr.trace.duration_s;
                agg.content_bits += sr.trace.content_bits;
                agg.knowledge_gain += sr.trace.knowledge_gain;
                report.semantic_packets_total += sr.semantic_packets;
            }
            agg.fidelity = report.final_fidelity;
            double eta_rate = agg.duration_s > 0 ? eta_per_second(traces, cfg) : 0.0;
            report.aggregate = kpi_record(agg, cfg, scenario.omega, eta_rate);
            report.semantic_dominates =
                report.semantic_packets_total < report.baseline_total.packets &&
                report.final_fidelity >= 1.0 - kDistributionTolerance;
        }
    }
    return report;
}

namespace {

std::string format_double(double v) { return kv::format_number(v); }

void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) fail("io-error", "cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void export_report(const RunReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto path = [&](const char* name) { return out_dir + "/" + name; };

    std::ostringstream trace;
    trace << "session,plane,kind,payload_bits,packets,corrupted,content_bits\n";
    for (const auto& sr : report.sessions)
        for (const auto& m : sr.messages)
            trace << m.session_id << "," << to_string(m.plane) << "," << to_string(m.kind) << ","
                  << m.payload_bits() << "," << m.packets << "," << (m.corrupted_packets > 0 ? 1 : 0)
                  << "," << m.content_bits << "\n";
    atomic_write(path("trace.csv"), trace.str());

    std::ostringstream kpi;
    kpi << "session,iota,eta,fully_semantic,eta_per_s,c_c,c_r,c_t,omega,regime,nu,zeta,reps,"
           "duration_s,fidelity,maturity,content_bits,knowledge_gain\n";
    auto kpi_row = [&](const std::string& label, const SessionTrace& t, const KpiRecord& k,
                       double maturity) {
        kpi << label << "," << format_double(k.iota) << "," << format_double(k.eta) << ","
            << (k.fully_semantic ? 1 : 0) << "," << format_double(k.eta_per_s) << ","
            << format_double(k.c_c) << "," << format_double(k.c_r) << "," << format_double(k.c_t)
            << "," << format_double(k.omega) << "," << to_string(k.regime) << "," << t.nu << ","
            << t.zeta << "," << t.reps_sent << "," << format_double(t.duration_s) << ","
            << format_double(t.fidelity) << "," << format_double(maturity) << "," << t.content_bits
            << "," << t.knowledge_gain << "\n";
    };
    for (const auto& sr : report.sessions)
        kpi_row(std::to_string(sr.trace.session_id), sr.trace, sr.kpi, sr.maturity);
    if (!report.scenario.baseline_only && !report.sessions.empty()) {
        SessionTrace agg;
        for (const auto& sr : report.sessions) {
            agg.reps_sent += sr.trace.reps_sent;
            agg.nu += sr.trace.nu;
            agg.zeta += sr.trace.zeta;
            agg.duration_s += sr.trace.duration_s;
            agg.content_bits += sr.trace.content_bits;
            agg.knowledge_gain += sr.trace.knowledge_gain;
        }
        agg.fidelity = report.final_fidelity;
        kpi_row("aggregate", agg, report.aggregate, report.final_maturity);
    }
    atomic_write(path("kpi.csv"), kpi.str());

    nlohmann::ordered_json summary;
    summary["version"] = report.version;
    summary["final_fidelity"] = report.final_fidelity;
    summary["final_maturity"] = report.final_maturity;
    summary["semantic_packets_total"] = report.semantic_packets_total;
    summary["baseline_packets_total"] = report.baseline_total.packets;
    summary["baseline_corrupted_packets"] = report.baseline_total.corrupted_packets;
    summary["baseline_seconds"] = report.baseline_total.seconds;
    summary["semantic_dominates_baseline"] = report.semantic_dominates;
    summary["reverse_adoptions"] = report.reverse_adoptions;
    summary["regime_timeline"] = report.regime_timeline;
    summary["aggregate"] = {
        {"iota", report.aggregate.iota},       {"eta", report.aggregate.eta},
        {"eta_per_s", report.aggregate.eta_per_s}, {"c_c", report.aggregate.c_c},
        {"c_r", report.aggregate.c_r},         {"c_t", report.aggregate.c_t},
        {"regime", to_string(report.aggregate.regime)},
    };
    summary["sessions"] = nlohmann::ordered_json::array();
    for (const auto& sr : report.sessions) {
        nlohmann::ordered_json row;
        row["session"] = sr.trace.session_id;
        row["nu"] = sr.trace.nu;
        row["zeta"] = sr.trace.zeta;
        row["reps"] = sr.trace.reps_sent;
        row["fidelity"] = sr.trace.fidelity;
        row["maturity"] = sr.maturity;
        row["knowledge_gain"] = sr.trace.knowledge_gain;
        row["content_bits"] = sr.trace.content_bits;
        row["stream_bits"] = sr.stream_bits;
        row["learnable_bits"] = sr.learnable_bits;
        row["memorizable_bits"] = sr.memorizable_bits;
        row["xm_packets"] = sr.xm_packets;
        row["semantic_packets"] = sr.semantic_packets;
        row["baseline_packets"] = sr.baseline_packets;
        row["regime"] = to_string(sr.kpi.regime);
        summary["sessions"].push_back(row);
    }
    atomic_write(path("summary.json"), summary.dump(2) + "\n");

    atomic_write(path("scenario.kv"), serialize_scenario(report.scenario));
    if (!report.language_text.empty()) atomic_write(path("language.semlang"), report.language_text);
    if (!report.sessions.empty() && !report.sessions.back().split_text.empty())
        atomic_write(path("split.txt"), report.sessions.back().split_text);
}

std::vector<SessionTrace> traces_from_csv(const std::string& path, const ChannelConfig& cfg) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open " + path);
    double rate = cfg.effective_symbol_rate();
    std::string line;
    if (!std::getline(in, line)) fail("io-error", "empty trace file");
    std::map<int, SessionTrace> by_session;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 7) fail("io-error", "malformed trace row '" + line + "'");
        int session = static_cast<int>(kv::parse_number(fields[0]));
        const std::string& kind = fields[2];
        long packets = static_cast<long>(kv::parse_number(fields[4]));
        long content_bits = static_cast<long>(kv::parse_number(fields[6]));
        SessionTrace& t = by_session[session];
        t.session_id = session;
        if (kind == "raw") t.nu += packets;
        if (kind == "query") t.zeta += packets;
        if (kind == "representation") t.reps_sent += 1;
        t.content_bits += content_bits;
        if (rate > 0) t.duration_s += static_cast<double>(packets) / rate;
    }
    std::vector<SessionTrace> out;
    for (auto& [id, t] : by_session) out.push_back(t);
    return out;
}

}  // namespace semcom
