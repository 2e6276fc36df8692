#pragma once

#include <string>
#include <utility>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/protocol.hpp"

namespace semcom {

/// The five reasoning-state regimes of a teacher/apprentice link.
enum class Regime {
    nascent,               // passive apprentice, mostly-classical link
    converging,            // eta approaching iota from below
    acknowledgement_like,  // eta equals iota: queries mirror acks
    language_dominant,     // eta above iota: mostly semantic transmissions
    representation_failure // high queries over a low-impact representation
};

const char* to_string(Regime regime);
Regime regime_from_string(const std::string& name);

struct KpiRecord {
    double iota = 0;        // semantic impact, packets
    double eta = 0;         // symmetry index for the session
    bool fully_semantic = false;  // nu was zero and got clamped
    double eta_per_s = 0;   // aggregate symmetry index per second
    double c_r = 0;         // reasoning capacity, bits/s
    double c_c = 0;         // Shannon capacity, bits/s
    double c_t = 0;         // total capacity, exactly c_c + c_r
    double omega = 0;       // computing capability, representation-decodings/s
    Regime regime = Regime::nascent;
};

/// Packets the classical bit pipe would need to regenerate the same content.
/// Independent of the semantic trace by construction.
long semantic_impact(const SessionTrace& trace, long content_bits, const ChannelConfig& cfg);

/// eta = (zeta / nu) * iota. A fully semantic session (nu = 0) clamps nu to 1
/// and reports it through the returned flag.
std::pair<double, bool> symmetry_index(long zeta, long nu, double iota);

/// C_R = omega * log2(1 + eta_per_s).
double reasoning_capacity(double omega, double eta_per_s);

struct Capacities {
    double c_c = 0;
    double c_r = 0;
    double c_t = 0;
};

/// C_T = W log2(1+gamma) + Omega log2(1+eta): the bit pipe plus the
/// computing-bounded reasoning term.
Capacities total_capacity(const ChannelConfig& cfg, double omega, double eta_per_s);

/// Places (eta, iota) into one of the five regimes. The equality band
/// |eta - iota| <= 1e-9 takes precedence, then the converging band
/// (iota - eta <= 0.1 iota with eta < iota), then the inequalities.
Regime classify_regime(double eta, double iota);

/// Aggregate-then-ratio rate: (sum zeta / clamped sum nu) * (sum iota / sum seconds).
double eta_per_second(const std::vector<SessionTrace>& traces, const ChannelConfig& cfg);

/// Full record for one session given the running aggregate eta per second.
KpiRecord kpi_record(const SessionTrace& trace, const ChannelConfig& cfg, double omega,
                     double eta_per_s);

}  // namespace semcom
