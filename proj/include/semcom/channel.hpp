#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "semcom/bits.hpp"
#include "semcom/pmf.hpp"

namespace semcom {

struct ChannelConfig {
    double bandwidth_w = 1.0;      // Hz
    double sinr_gamma = 1.0;       // linear SINR
    long payload_bits = 256;       // bits per packet
    double bit_error_prob = 0.0;   // independent per bit
    double symbol_rate = 0.0;      // packets per second; 0 derives it from capacity

    /// Packets per second actually used for time accounting: symbol_rate when
    /// set, otherwise the rate at which raw bits match the Shannon capacity.
    double effective_symbol_rate() const;
};

void validate_config(const ChannelConfig& cfg);

struct TransmissionCost {
    long packets = 0;
    long bits = 0;  // packets * payload_bits, padding included
    double seconds = 0.0;
    long corrupted_packets = 0;

    TransmissionCost& operator+=(const TransmissionCost& other);
};

/// -log2 p, the information of observing an event of probability p.
double self_information(double p);

/// Shannon entropy in bits, with 0 log 0 = 0.
double entropy(const Pmf& pmf);

/// W log2(1 + gamma) in bits per second.
double shannon_capacity(const ChannelConfig& cfg);

/// Capacity of a discrete memoryless channel in bits per channel use.
/// rows of `transition` are P(output | input); computed by alternating
/// maximization to absolute tolerance 1e-6.
double discrete_capacity(const std::vector<std::vector<double>>& transition);

/// Packetizes and flips each bit independently with bit_error_prob under the
/// seeded generator. Deterministic per seed.
std::pair<Bits, TransmissionCost> transmit(const Bits& payload, const ChannelConfig& cfg,
                                           std::uint64_t seed);

/// Packets a classical bit pipe needs for content_bits, including the
/// idealized expected-retransmission factor 1 / (1 - per-packet error prob).
long classical_packets_needed(long content_bits, const ChannelConfig& cfg);

}  // namespace semcom
