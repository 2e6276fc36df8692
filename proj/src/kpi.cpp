#include "semcom/kpi.hpp"

#include <cmath>

#include "semcom/errors.hpp"

namespace semcom {

const char* to_string(Regime regime) {
    switch (regime) {
        case Regime::nascent: return "nascent";
        case Regime::converging: return "converging";
        case Regime::acknowledgement_like: return "acknowledgement_like";
        case Regime::language_dominant: return "language_dominant";
        case Regime::representation_failure: return "representation_failure";
    }
    return "?";
}

Regime regime_from_string(const std::string& name) {
    for (Regime r : {Regime::nascent, Regime::converging, Regime::acknowledgement_like,
                     Regime::language_dominant, Regime::representation_failure})
        if (name == to_string(r)) return r;
    fail("invalid-argument", "unknown regime '" + name + "'");
}

long semantic_impact(const SessionTrace& trace, long content_bits, const ChannelConfig& cfg) {
    (void)trace;  // the classical oracle is independent of the semantic path
    return classical_packets_needed(content_bits, cfg);
}

std::pair<double, bool> symmetry_index(long zeta, long nu, double iota) {
    if (zeta < 0 || nu < 0 || iota < 0) fail("invalid-argument", "counts must be nonnegative");
    bool fully_semantic = nu == 0;
    double denom = fully_semantic ? 1.0 : static_cast<double>(nu);
    return {static_cast<double>(zeta) / denom * iota, fully_semantic};
}

double reasoning_capacity(double omega, double eta_per_s) {
    if (omega < 0 || eta_per_s < 0) fail("invalid-argument", "inputs must be nonnegative");
    return omega * std::log2(1.0 + eta_per_s);
}

Capacities total_capacity(const ChannelConfig& cfg, double omega, double eta_per_s) {
    Capacities c;
    c.c_c = shannon_capacity(cfg);
    c.c_r = reasoning_capacity(omega, eta_per_s);
    c.c_t = c.c_c + c.c_r;
    return c;
}

Regime classify_regime(double eta, double iota) {
    if (eta < 0 || iota < 0) fail("invalid-argument", "eta and iota must be nonnegative");
    if (iota > 1.0) {
        if (std::abs(eta - iota) <= 1e-9) return Regime::acknowledgement_like;
        if (eta < iota && iota - eta <= 0.1 * iota) return Regime::converging;
        if (eta > iota) return Regime::language_dominant;
        return Regime::nascent;
    }
    if (eta > iota) return Regime::representation_failure;
    return Regime::nascent;
}

double eta_per_second(const std::vector<SessionTrace>& traces, const ChannelConfig& cfg) {
    if (traces.empty()) fail("empty-trace-list", "need at least one session trace");
    long zeta = 0, nu = 0;
    double iota = 0, seconds = 0;
    for (const auto& t : traces) {
        zeta += t.zeta;
        nu += t.nu;
        if (t.content_bits > 0) iota += static_cast<double>(classical_packets_needed(t.content_bits, cfg));
        seconds += t.duration_s;
    }
    if (seconds <= 0) fail("empty-trace-list", "total duration must be positive");
    double denom = nu == 0 ? 1.0 : static_cast<double>(nu);
    return static_cast<double>(zeta) / denom * (iota / seconds);
}

KpiRecord kpi_record(const SessionTrace& trace, const ChannelConfig& cfg, double omega,
                     double eta_per_s) {
    KpiRecord r;
    r.iota = trace.content_bits > 0
                 ? static_cast<double>(semantic_impact(trace, trace.content_bits, cfg))
                 : 0.0;
    auto [eta, flag] = symmetry_index(trace.zeta, trace.nu, r.iota);
    r.eta = eta;
    r.fully_semantic = flag;
    r.eta_per_s = eta_per_s;
    Capacities c = total_capacity(cfg, omega, eta_per_s);
    r.c_c = c.c_c;
    r.c_r = c.c_r;
    r.c_t = c.c_t;
    r.omega = omega;
    r.regime = classify_regime(r.eta, r.iota);
    return r;
}

}  // namespace semcom
