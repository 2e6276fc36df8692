// Python bindings for the core operations: causal models and queries, the MDL
// machinery, the stream splitter, channel math, the protocol KPIs, and the
// scenario harness.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semcom/causal_checks.hpp"
#include "semcom/channel.hpp"
#include "semcom/errors.hpp"
#include "semcom/harness.hpp"
#include "semcom/kpi.hpp"
#include "semcom/mdl.hpp"
#include "semcom/protocol.hpp"
#include "semcom/scm.hpp"
#include "semcom/splitter.hpp"

namespace py = pybind11;
using namespace semcom;

namespace {

Intervention make_intervention(const std::map<std::string, std::string>& assignments,
                               const std::map<std::string, std::string>& conditioning) {
    Intervention iv;
    iv.assignments = assignments;
    iv.conditioning = conditioning;
    return iv;
}

// Value wrapper: pybind11 holders cannot be shared_ptr<const T>.
struct PyModel {
    ModelPtr ptr;
};

ModelFamily family_of(const std::vector<PyModel>& members) {
    ModelFamily fam;
    for (const auto& m : members) fam.members.push_back(m.ptr);
    return fam;
}

}  // namespace

PYBIND11_MODULE(_semcom, m) {
    m.attr("__version__") = SEMCOM_VERSION;

    py::register_exception<Error>(m, "SemcomError");

    // ---- causal core ----
    py::class_<Variable>(m, "Variable")
        .def(py::init([](std::string id, std::vector<std::string> alphabet) {
                 return Variable{std::move(id), std::move(alphabet)};
             }),
             py::arg("id"), py::arg("alphabet"))
        .def_readwrite("id", &Variable::id)
        .def_readwrite("alphabet", &Variable::alphabet);

    py::class_<Mechanism>(m, "Mechanism")
        .def(py::init([](std::string target, std::vector<std::string> parents,
                         std::vector<double> noise, std::vector<int> table) {
                 return Mechanism{std::move(target), std::move(parents), std::move(noise),
                                  std::move(table)};
             }),
             py::arg("target"), py::arg("parents"), py::arg("noise"), py::arg("table"))
        .def_readwrite("target", &Mechanism::target)
        .def_readwrite("parents", &Mechanism::parents)
        .def_readwrite("noise", &Mechanism::noise)
        .def_readwrite("table", &Mechanism::table);

    py::class_<Scm>(m, "Scm")
        .def(py::init<>())
        .def(py::init([](std::vector<Variable> variables, std::vector<Mechanism> mechanisms) {
                 return Scm{std::move(variables), std::move(mechanisms)};
             }),
             py::arg("variables"), py::arg("mechanisms"))
        .def_readwrite("variables", &Scm::variables)
        .def_readwrite("mechanisms", &Scm::mechanisms)
        .def("__eq__", [](const Scm& a, const Scm& b) { return a == b; });

    py::class_<JointPmf>(m, "JointPmf")
        .def_property_readonly("ids", &JointPmf::ids)
        .def_property_readonly("cardinalities", &JointPmf::cardinalities)
        .def("states", &JointPmf::states)
        .def("prob", &JointPmf::prob, py::arg("assignment"))
        .def("marginal", [](const JointPmf& j, const std::string& id) { return j.marginal(id).p; },
             py::arg("id"));

    m.def("validate_scm", [](const Scm& scm) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& issue : validate(scm)) out.emplace_back(issue.code, issue.detail);
        return out;
    });
    m.def("joint_distribution", &joint_distribution);
    m.def("sample", &sample, py::arg("scm"), py::arg("seed"));
    m.def(
        "apply_do",
        [](const Scm& scm, const std::map<std::string, std::string>& assignments) {
            return apply_do(scm, make_intervention(assignments, {}));
        },
        py::arg("scm"), py::arg("assignments"));
    m.def(
        "interventional_distribution",
        [](const Scm& scm, const std::map<std::string, std::string>& assignments,
           const std::string& target, const std::map<std::string, std::string>& conditioning) {
            return interventional_distribution(scm, make_intervention(assignments, conditioning), target)
                .p;
        },
        py::arg("scm"), py::arg("assignments"), py::arg("target"),
        py::arg("conditioning") = std::map<std::string, std::string>{});
    m.def(
        "counterfactual",
        [](const Scm& scm, const std::map<std::string, std::string>& factual,
           const std::map<std::string, std::string>& assignments, const std::string& target) {
            CounterfactualQuery q;
            q.factual = factual;
            q.intervention = make_intervention(assignments, {});
            q.target = target;
            return counterfactual(scm, q).p;
        },
        py::arg("scm"), py::arg("factual"), py::arg("assignments"), py::arg("target"));
    m.def("serialize_scm", &serialize_scm);
    m.def("parse_scm", &parse_scm);

    m.def("check_disentangled", &check_disentangled, py::arg("joint"), py::arg("parent_sets"));
    m.def(
        "check_mechanism_independence",
        [](const Scm& scm, const std::string& var,
           const std::map<std::string, std::string>& assignments) {
            return check_mechanism_independence(scm, var, make_intervention(assignments, {}));
        },
        py::arg("scm"), py::arg("var"), py::arg("assignments"));
    m.def(
        "check_generalizable",
        [](const Scm& scm, const std::string& content_var, const ReprMap& repr,
           const std::vector<std::map<std::string, std::string>>& queries) {
            std::vector<Intervention> ivs;
            for (const auto& q : queries) ivs.push_back(make_intervention(q, {}));
            return check_generalizable(scm, content_var, repr, ivs);
        },
        py::arg("scm"), py::arg("content_var"), py::arg("repr"), py::arg("queries"));
    m.def(
        "check_style_invariance",
        [](const Scm& scm, const std::string& structure_var, const ReprMap& repr,
           const std::vector<std::map<std::string, std::string>>& style_ivs) {
            std::vector<Intervention> ivs;
            for (const auto& q : style_ivs) ivs.push_back(make_intervention(q, {}));
            return check_style_invariance(scm, structure_var, repr, ivs);
        },
        py::arg("scm"), py::arg("structure_var"), py::arg("repr"), py::arg("style_ivs"));
    m.def("check_counterfactually_invariant", &check_counterfactually_invariant, py::arg("scm"),
          py::arg("repr"), py::arg("q_var"));

    // ---- channel ----
    py::class_<ChannelConfig>(m, "ChannelConfig")
        .def(py::init<>())
        .def_readwrite("bandwidth_w", &ChannelConfig::bandwidth_w)
        .def_readwrite("sinr_gamma", &ChannelConfig::sinr_gamma)
        .def_readwrite("payload_bits", &ChannelConfig::payload_bits)
        .def_readwrite("bit_error_prob", &ChannelConfig::bit_error_prob)
        .def_readwrite("symbol_rate", &ChannelConfig::symbol_rate);

    m.def("self_information", &self_information, py::arg("p"));
    m.def(
        "entropy",
        [](const std::vector<double>& p) {
            Pmf pmf;
            pmf.p = p;
            return entropy(pmf);
        },
        py::arg("pmf"));
    m.def("shannon_capacity", &shannon_capacity, py::arg("cfg"));
    m.def("discrete_capacity", &discrete_capacity, py::arg("transition"));
    m.def(
        "transmit",
        [](const std::string& bits, const ChannelConfig& cfg, std::uint64_t seed) {
            auto [received, cost] = transmit(Bits::from_string(bits), cfg, seed);
            return py::make_tuple(received.to_string(), cost.packets, cost.corrupted_packets,
                                  cost.seconds);
        },
        py::arg("bits"), py::arg("cfg"), py::arg("seed"));
    m.def("classical_packets_needed", &classical_packets_needed, py::arg("content_bits"),
          py::arg("cfg"));

    // ---- MDL machinery ----
    py::class_<PyModel>(m, "ConditionalModel")
        .def_property_readonly("id", [](const PyModel& m_) { return m_.ptr->id(); })
        .def("prob",
             [](const PyModel& m_, const std::string& input, const std::string& rep) {
                 return m_.ptr->prob(input, rep);
             },
             py::arg("input"), py::arg("rep"));
    m.def(
        "make_constant_model",
        [](std::string id, std::string rep) {
            return PyModel{make_constant_model(std::move(id), std::move(rep))};
        },
        py::arg("id"), py::arg("rep"));
    m.def(
        "make_uniform_model",
        [](std::string id, std::vector<std::string> reps) {
            return PyModel{make_uniform_model(std::move(id), std::move(reps))};
        },
        py::arg("id"), py::arg("reps"));
    m.def(
        "make_lookup_model",
        [](std::string id, std::map<std::string, std::string> table, std::vector<std::string> reps,
           double eps) {
            return PyModel{make_lookup_model(std::move(id), std::move(table), std::move(reps), eps)};
        },
        py::arg("id"), py::arg("table"), py::arg("reps"), py::arg("eps") = 0.0);

    py::class_<ComplexityReport>(m, "ComplexityReport")
        .def_readonly("gamma", &ComplexityReport::gamma)
        .def_readonly("chosen_model", &ComplexityReport::chosen_model)
        .def_readonly("loss", &ComplexityReport::loss)
        .def_readonly("k", &ComplexityReport::k)
        .def_readonly("lambda_", &ComplexityReport::lambda)
        .def_readonly("t", &ComplexityReport::t);

    auto to_pairs = [](const std::vector<std::pair<std::string, std::string>>& raw) {
        std::vector<ScoredPair> pairs;
        for (const auto& [input, rep] : raw) pairs.push_back({input, rep});
        return pairs;
    };
    m.def(
        "cross_entropy_loss",
        [to_pairs](const PyModel& model, const std::vector<std::pair<std::string, std::string>>& p) {
            return cross_entropy_loss(*model.ptr, to_pairs(p));
        },
        py::arg("model"), py::arg("pairs"));
    m.def("description_length_bits",
          [](const PyModel& model) { return description_length_bits(*model.ptr); });
    m.def(
        "language_complexity",
        [to_pairs](const std::vector<PyModel>& members,
                   const std::vector<std::pair<std::string, std::string>>& p) {
            return language_complexity(family_of(members), to_pairs(p));
        },
        py::arg("family"), py::arg("pairs"));
    m.def(
        "structure_function",
        [to_pairs](const std::vector<PyModel>& members,
                   const std::vector<std::pair<std::string, std::string>>& p, long t_bits) {
            return structure_function(family_of(members), to_pairs(p), t_bits);
        },
        py::arg("family"), py::arg("pairs"), py::arg("t_bits"));
    m.def(
        "lagrangian_complexity",
        [to_pairs](const std::vector<PyModel>& members,
                   const std::vector<std::pair<std::string, std::string>>& p, double lambda) {
            return lagrangian_complexity(family_of(members), to_pairs(p), lambda);
        },
        py::arg("family"), py::arg("pairs"), py::arg("lambda_"));
    m.def(
        "legendre_consistency",
        [to_pairs](const std::vector<PyModel>& members,
                   const std::vector<std::pair<std::string, std::string>>& p,
                   const std::vector<double>& grid) {
            return legendre_consistency(family_of(members), to_pairs(p), grid);
        },
        py::arg("family"), py::arg("pairs"), py::arg("lambda_grid"));

    py::class_<Representation>(m, "Representation")
        .def(py::init([](std::string id, Scm payload) {
                 return Representation{std::move(id), std::move(payload)};
             }),
             py::arg("id"), py::arg("payload"))
        .def_readwrite("id", &Representation::id)
        .def_readwrite("payload", &Representation::payload)
        .def("__eq__", [](const Representation& a, const Representation& b) { return a == b; });
    m.def("encode", [](const Representation& rep) { return encode(rep).to_string(); });
    m.def("decode", [](const std::string& bits) { return decode(Bits::from_string(bits)); });

    // ---- splitter ----
    py::class_<Segment>(m, "Segment")
        .def_readonly("learnable", &Segment::learnable)
        .def_readonly("offset", &Segment::offset)
        .def_readonly("length", &Segment::length)
        .def_readonly("gain_bits", &Segment::gain_bits);
    py::class_<SplitResult>(m, "SplitResult")
        .def_readonly("segments", &SplitResult::segments)
        .def("learnable_symbols", &SplitResult::learnable_symbols)
        .def("total_symbols", &SplitResult::total_symbols);
    m.def(
        "split_stream",
        [](const std::vector<int>& symbols, int alphabet, std::size_t window, double theta) {
            Datastream s;
            s.alphabet_size = alphabet;
            s.symbols = symbols;
            return split(s, build_stream_family(s), window, theta);
        },
        py::arg("symbols"), py::arg("alphabet"), py::arg("window") = kDefaultSplitWindow,
        py::arg("theta") = kDefaultSplitTheta);

    // ---- KPIs ----
    m.def("symmetry_index", &symmetry_index, py::arg("zeta"), py::arg("nu"), py::arg("iota"));
    m.def("reasoning_capacity", &reasoning_capacity, py::arg("omega"), py::arg("eta_per_s"));
    m.def(
        "total_capacity",
        [](const ChannelConfig& cfg, double omega, double eta_per_s) {
            auto c = total_capacity(cfg, omega, eta_per_s);
            return py::make_tuple(c.c_c, c.c_r, c.c_t);
        },
        py::arg("cfg"), py::arg("omega"), py::arg("eta_per_s"));
    m.def(
        "classify_regime",
        [](double eta, double iota) { return std::string(to_string(classify_regime(eta, iota))); },
        py::arg("eta"), py::arg("iota"));

    // ---- harness ----
    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("seed", &Scenario::seed)
        .def_readwrite("sessions", &Scenario::sessions)
        .def_readwrite("elements", &Scenario::elements)
        .def_readwrite("variables", &Scenario::variables)
        .def_readwrite("alphabet", &Scenario::alphabet)
        .def_readwrite("noise_level", &Scenario::noise_level)
        .def_readwrite("frames", &Scenario::frames)
        .def_readwrite("channel", &Scenario::channel)
        .def_readwrite("omega", &Scenario::omega)
        .def_readwrite("lambda_", &Scenario::lambda)
        .def_readwrite("theta", &Scenario::theta)
        .def_readwrite("window", &Scenario::window)
        .def_readwrite("query_budget", &Scenario::query_budget)
        .def_readwrite("raw_fraction_scale", &Scenario::raw_fraction_scale)
        .def_readwrite("filler_symbols", &Scenario::filler_symbols)
        .def_readwrite("shower", &Scenario::shower)
        .def_readwrite("baseline_only", &Scenario::baseline_only);
    m.def("parse_scenario", &parse_scenario);
    m.def("load_scenario", &load_scenario);
    m.def("serialize_scenario", &serialize_scenario);

    m.def("run_experiment_to_dir", [](const Scenario& scenario, const std::string& out_dir) {
        RunReport report = run_experiment(scenario);
        export_report(report, out_dir);
        py::dict summary;
        summary["final_fidelity"] = report.final_fidelity;
        summary["final_maturity"] = report.final_maturity;
        summary["semantic_packets"] = report.semantic_packets_total;
        summary["baseline_packets"] = report.baseline_total.packets;
        summary["semantic_dominates"] = report.semantic_dominates;
        summary["c_c"] = report.aggregate.c_c;
        summary["c_r"] = report.aggregate.c_r;
        summary["c_t"] = report.aggregate.c_t;
        py::list sessions;
        for (const auto& sr : report.sessions) {
            py::dict row;
            row["session"] = sr.trace.session_id;
            row["nu"] = sr.trace.nu;
            row["zeta"] = sr.trace.zeta;
            row["fidelity"] = sr.trace.fidelity;
            row["maturity"] = sr.maturity;
            row["regime"] = to_string(sr.kpi.regime);
            sessions.append(row);
        }
        summary["sessions"] = sessions;
        return summary;
    });
}
