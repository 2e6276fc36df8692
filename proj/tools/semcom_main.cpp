// Command-line front end: run scenarios, validate configs, and re-derive KPIs
// from exported traces.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "semcom/errors.hpp"
#include "semcom/harness.hpp"
#include "semcom/kv.hpp"

namespace {

int cmd_run(const std::string& scenario_path, const std::string& out_dir, long long seed_override,
            bool baseline_only) {
    semcom::Scenario scenario = semcom::load_scenario(scenario_path);
    if (seed_override >= 0) scenario.seed = static_cast<std::uint64_t>(seed_override);
    if (baseline_only) scenario.baseline_only = true;
    semcom::RunReport report = semcom::run_experiment(scenario);
    semcom::export_report(report, out_dir);
    std::cout << "wrote " << out_dir << "/trace.csv, kpi.csv, summary.json, scenario.kv\n";
    std::cout << "sessions: " << report.sessions.size();
    if (scenario.baseline_only) {
        std::cout << "  baseline packets: " << report.baseline_total.packets << "\n";
    } else {
        std::cout << "  final fidelity: " << report.final_fidelity
                  << "  final maturity: " << report.final_maturity << "\n";
    }
    if (!scenario.baseline_only) {
        std::cout << "semantic packets: " << report.semantic_packets_total
                  << "  baseline packets: " << report.baseline_total.packets
                  << (report.semantic_dominates ? "  (semantic path dominates)" : "") << "\n";
        std::cout << "c_c " << report.aggregate.c_c << " + c_r " << report.aggregate.c_r << " = c_t "
                  << report.aggregate.c_t << " bits/s\n";
    }
    return 0;
}

int cmd_validate(const std::string& scenario_path) {
    semcom::Scenario scenario = semcom::load_scenario(scenario_path);
    std::cout << "scenario ok: " << scenario.sessions << " sessions, " << scenario.elements
              << " elements, seed " << scenario.seed << "\n";
    return 0;
}

int cmd_kpi(const std::string& trace_path, std::string scenario_path) {
    if (scenario_path.empty()) {
        auto sibling = std::filesystem::path(trace_path).parent_path() / "scenario.kv";
        scenario_path = sibling.string();
    }
    semcom::Scenario scenario = semcom::load_scenario(scenario_path);
    auto traces = semcom::traces_from_csv(trace_path, scenario.channel);
    if (traces.empty()) {
        std::cout << "no sessions in trace\n";
        return 0;
    }
    std::cout << "session,iota,eta,eta_per_s,c_c,c_r,c_t,regime\n";
    std::vector<semcom::SessionTrace> prefix;
    for (const auto& t : traces) {
        prefix.push_back(t);
        double rate = 0.0;
        double total = 0.0;
        for (const auto& p : prefix) total += p.duration_s;
        if (total > 0) rate = semcom::eta_per_second(prefix, scenario.channel);
        auto kpi = semcom::kpi_record(t, scenario.channel, scenario.omega, rate);
        std::cout << t.session_id << "," << semcom::kv::format_number(kpi.iota) << ","
                  << semcom::kv::format_number(kpi.eta) << ","
                  << semcom::kv::format_number(kpi.eta_per_s) << ","
                  << semcom::kv::format_number(kpi.c_c) << "," << semcom::kv::format_number(kpi.c_r)
                  << "," << semcom::kv::format_number(kpi.c_t) << "," << to_string(kpi.regime)
                  << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic communication link simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out", trace_path, kpi_scenario;
    long long seed_override = -1;
    bool baseline_only = false;

    auto* run = app.add_subcommand("run", "run a scenario and export the report");
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed_override, "override the scenario seed");
    run->add_flag("--baseline-only", baseline_only, "classical baseline only");

    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("--scenario", scenario_path, "scenario file")->required();

    auto* kpi = app.add_subcommand("kpi", "re-derive KPIs from an exported trace");
    kpi->add_option("--trace", trace_path, "trace.csv path")->required();
    kpi->add_option("--scenario", kpi_scenario, "scenario file (default: sibling scenario.kv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(scenario_path, out_dir, seed_override, baseline_only);
        if (validate->parsed()) return cmd_validate(scenario_path);
        if (kpi->parsed()) return cmd_kpi(trace_path, kpi_scenario);
    } catch (const semcom::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::string code = e.code();
        bool config = code == "config-error" || code == "io-error";
        return config ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
