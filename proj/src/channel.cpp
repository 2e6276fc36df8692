#include "semcom/channel.hpp"

#include <cmath>
#include <random>

#include "semcom/errors.hpp"

namespace semcom {

double ChannelConfig::effective_symbol_rate() const {
    if (symbol_rate > 0) return symbol_rate;
    double capacity = bandwidth_w * std::log2(1.0 + sinr_gamma);
    return capacity > 0 ? capacity / static_cast<double>(payload_bits) : 0.0;
}

void validate_config(const ChannelConfig& cfg) {
    if (cfg.bandwidth_w < 0 || cfg.sinr_gamma < 0 || cfg.symbol_rate < 0)
        fail("config-error", "channel parameters must be nonnegative");
    if (cfg.payload_bits < 8) fail("config-error", "payload must be at least 8 bits");
    if (cfg.bit_error_prob < 0 || cfg.bit_error_prob > 0.5)
        fail("config-error", "bit error probability must lie in [0, 0.5]");
}

TransmissionCost& TransmissionCost::operator+=(const TransmissionCost& other) {
    packets += other.packets;
    bits += other.bits;
    seconds += other.seconds;
    corrupted_packets += other.corrupted_packets;
    return *this;
}

double self_information(double p) {
    if (!(p > 0.0) || p > 1.0) fail("invalid-probability", "probability must lie in (0, 1]");
    return -std::log2(p);
}

double entropy(const Pmf& pmf) {
    if (!pmf.is_normalized()) fail("invalid-probability", "pmf does not sum to 1");
    for (double v : pmf.p)
        if (v < 0) fail("invalid-probability", "pmf has negative mass");
    return pmf.entropy_bits();
}

double shannon_capacity(const ChannelConfig& cfg) {
    validate_config(cfg);
    return cfg.bandwidth_w * std::log2(1.0 + cfg.sinr_gamma);
}

double discrete_capacity(const std::vector<std::vector<double>>& transition) {
    const std::size_t nx = transition.size();
    if (nx == 0) fail("non-stochastic-matrix", "empty transition matrix");
    const std::size_t ny = transition[0].size();
    for (const auto& row : transition) {
        if (row.size() != ny || ny == 0)
            fail("non-stochastic-matrix", "ragged or empty transition matrix");
        double s = 0;
        for (double v : row) {
            if (v < 0) fail("non-stochastic-matrix", "negative transition probability");
            s += v;
        }
        if (std::abs(s - 1.0) > kMassTolerance)
            fail("non-stochastic-matrix", "transition rows must sum to 1");
    }

    // Blahut-Arimoto. The Arimoto bounds bracket the capacity, so iteration
    // stops once the gap is under the absolute tolerance.
    std::vector<double> r(nx, 1.0 / static_cast<double>(nx));
    std::vector<double> q(ny, 0.0);
    const double tol = 1e-7;
    for (int iter = 0; iter < 10000; ++iter) {
        for (std::size_t y = 0; y < ny; ++y) {
            q[y] = 0;
            for (std::size_t x = 0; x < nx; ++x) q[y] += r[x] * transition[x][y];
        }
        // c_x = exp(sum_y P(y|x) ln(P(y|x)/q(y)))
        std::vector<double> c(nx, 0.0);
        double ub = 0, lb = 0;
        for (std::size_t x = 0; x < nx; ++x) {
            double s = 0;
            for (std::size_t y = 0; y < ny; ++y) {
                double pyx = transition[x][y];
                if (pyx > 0 && q[y] > 0) s += pyx * std::log(pyx / q[y]);
            }
            c[x] = std::exp(s);
        }
        double z = 0;
        for (std::size_t x = 0; x < nx; ++x) z += r[x] * c[x];
        lb = std::log(z);
        ub = 0;
        for (std::size_t x = 0; x < nx; ++x) ub = std::max(ub, std::log(c[x]));
        if (ub - lb < tol * std::log(2.0)) return lb / std::log(2.0);
        for (std::size_t x = 0; x < nx; ++x) r[x] = r[x] * c[x] / z;
    }
    fail("non-stochastic-matrix", "capacity iteration failed to converge");
}

std::pair<Bits, TransmissionCost> transmit(const Bits& payload, const ChannelConfig& cfg,
                                           std::uint64_t seed) {
    validate_config(cfg);
    TransmissionCost cost;
    cost.packets = static_cast<long>((payload.size() + static_cast<std::size_t>(cfg.payload_bits) - 1) /
                                     static_cast<std::size_t>(cfg.payload_bits));
    cost.bits = cost.packets * cfg.payload_bits;
    double rate = cfg.effective_symbol_rate();
    cost.seconds = rate > 0 ? static_cast<double>(cost.packets) / rate : 0.0;

    Bits received = payload;
    if (cfg.bit_error_prob > 0) {
        std::mt19937_64 rng(seed);
        auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        long corrupted = 0;
        bool packet_hit = false;
        for (std::size_t i = 0; i < payload.size(); ++i) {
            if (i % static_cast<std::size_t>(cfg.payload_bits) == 0) {
                corrupted += packet_hit;
                packet_hit = false;
            }
            if (uniform() < cfg.bit_error_prob) {
                received.set(i, !received.get(i));
                packet_hit = true;
            }
        }
        corrupted += packet_hit;
        cost.corrupted_packets = corrupted;
    }
    return {received, cost};
}

long classical_packets_needed(long content_bits, const ChannelConfig& cfg) {
    validate_config(cfg);
    if (content_bits <= 0) fail("invalid-argument", "content bits must be positive");
    long base = (content_bits + cfg.payload_bits - 1) / cfg.payload_bits;
    double packet_ok = std::pow(1.0 - cfg.bit_error_prob, static_cast<double>(cfg.payload_bits));
    if (packet_ok <= 0) fail("config-error", "per-packet error probability is 1");
    return static_cast<long>(std::ceil(static_cast<double>(base) / packet_ok));
}

}  // namespace semcom
