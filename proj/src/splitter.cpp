#include "semcom/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "semcom/errors.hpp"
#include "semcom/kv.hpp"

namespace semcom {

std::size_t SplitResult::learnable_symbols() const {
    std::size_t n = 0;
    for (const auto& s : segments)
        if (s.learnable) n += s.length;
    return n;
}

std::size_t SplitResult::total_symbols() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.length;
    return n;
}

namespace {

void check_stream(const Datastream& stream) {
    if (stream.alphabet_size < 1) fail("invalid-argument", "alphabet must be nonempty");
    if (stream.symbols.empty()) fail("invalid-argument", "stream must be nonempty");
    for (int s : stream.symbols)
        if (s < 0 || s >= stream.alphabet_size)
            fail("invalid-argument", "stream symbol outside the declared alphabet");
}

// Markov predictor of fixed order with 8-bit quantized conditional tables
// fitted on a stream range (Laplace smoothing keeps every code finite).
class MarkovStreamModel final : public StreamModel {
public:
    MarkovStreamModel(const Datastream& stream, int order, std::size_t fit_begin,
                      std::size_t fit_end, const std::string& suffix)
        : id_("markov" + std::to_string(order) + suffix),
          order_(order),
          alphabet_(stream.alphabet_size) {
        contexts_ = 1;
        for (int i = 0; i < order_; ++i) contexts_ *= static_cast<std::size_t>(alphabet_);
        std::vector<std::size_t> counts(contexts_ * static_cast<std::size_t>(alphabet_), 0);
        for (std::size_t t = std::max(fit_begin, static_cast<std::size_t>(order_)); t < fit_end; ++t)
            ++counts[context_at(stream, t) * static_cast<std::size_t>(alphabet_) +
                     static_cast<std::size_t>(stream.symbols[t])];
        quant_.resize(counts.size());
        row_sum_.resize(contexts_);
        for (std::size_t ctx = 0; ctx < contexts_; ++ctx) {
            std::size_t total = 0;
            for (int a = 0; a < alphabet_; ++a)
                total += counts[ctx * static_cast<std::size_t>(alphabet_) + static_cast<std::size_t>(a)];
            int sum = 0;
            for (int a = 0; a < alphabet_; ++a) {
                std::size_t i = ctx * static_cast<std::size_t>(alphabet_) + static_cast<std::size_t>(a);
                double smoothed = (static_cast<double>(counts[i]) + 1.0) /
                                  (static_cast<double>(total) + static_cast<double>(alphabet_));
                quant_[i] = static_cast<int>(std::max(1L, std::lround(smoothed * 255.0)));
                sum += quant_[i];
            }
            row_sum_[ctx] = sum;
        }
    }

    const std::string& id() const override { return id_; }

    long k_bits() const override {
        // kind + order bytes, then one byte per quantized table cell
        return 8 * (2 + static_cast<long>(quant_.size()));
    }

    double cost_bits(const Datastream& stream, std::size_t begin, std::size_t end) const override {
        double bits = 0;
        for (std::size_t t = begin; t < end; ++t) {
            if (t < static_cast<std::size_t>(order_)) {
                bits += std::log2(static_cast<double>(alphabet_));
                continue;
            }
            std::size_t i = context_at(stream, t) * static_cast<std::size_t>(alphabet_) +
                            static_cast<std::size_t>(stream.symbols[t]);
            bits -= std::log2(static_cast<double>(quant_[i]) /
                              static_cast<double>(row_sum_[context_at(stream, t)]));
        }
        return bits;
    }

private:
    std::size_t context_at(const Datastream& stream, std::size_t t) const {
        std::size_t ctx = 0;
        for (int k = order_; k >= 1; --k)
            ctx = ctx * static_cast<std::size_t>(alphabet_) +
                  static_cast<std::size_t>(stream.symbols[t - static_cast<std::size_t>(k)]);
        return ctx;
    }

    std::string id_;
    int order_;
    int alphabet_;
    std::size_t contexts_;
    std::vector<int> quant_;
    std::vector<int> row_sum_;
};

// Phase-locked periodic predictor: majority symbol per phase over the fit
// range, small smoothing for mismatches (eps = 16/256).
class PeriodicStreamModel final : public StreamModel {
public:
    PeriodicStreamModel(const Datastream& stream, std::size_t period, std::size_t fit_begin,
                        std::size_t fit_end, const std::string& suffix)
        : id_("periodic" + std::to_string(period) + suffix),
          period_(period),
          alphabet_(stream.alphabet_size) {
        pattern_.resize(period_);
        for (std::size_t phase = 0; phase < period_; ++phase) {
            std::vector<std::size_t> counts(static_cast<std::size_t>(alphabet_), 0);
            std::size_t start = fit_begin + (period_ - fit_begin % period_ + phase) % period_;
            for (std::size_t t = start; t < fit_end; t += period_)
                ++counts[static_cast<std::size_t>(stream.symbols[t])];
            pattern_[phase] = static_cast<int>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
        }
    }

    const std::string& id() const override { return id_; }

    long k_bits() const override {
        // kind + period bytes, one byte per pattern symbol, one eps byte
        return 8 * (2 + static_cast<long>(period_) + 1);
    }

    double cost_bits(const Datastream& stream, std::size_t begin, std::size_t end) const override {
        if (alphabet_ == 1) return 0.0;
        const double eps = 16.0 / 256.0;
        const double match = -std::log2(1.0 - eps);
        const double miss = -std::log2(eps / static_cast<double>(alphabet_ - 1));
        double bits = 0;
        for (std::size_t t = begin; t < end; ++t)
            bits += stream.symbols[t] == pattern_[t % period_] ? match : miss;
        return bits;
    }

private:
    std::string id_;
    std::size_t period_;
    int alphabet_;
    std::vector<int> pattern_;
};

}  // namespace

StreamModelFamily build_stream_family(const Datastream& stream, int max_markov_order, int max_period) {
    check_stream(stream);
    // Candidates are fitted on the whole stream and on each third, so a
    // pattern confined to one region still gets a dedicated member even when
    // other regions would outvote it globally.
    const std::size_t n = stream.symbols.size();
    std::vector<std::tuple<std::size_t, std::size_t, std::string>> ranges{{0, n, ""}};
    if (n >= 12) {
        ranges.emplace_back(0, n / 3, "@0");
        ranges.emplace_back(n / 3, 2 * n / 3, "@1");
        ranges.emplace_back(2 * n / 3, n, "@2");
    }
    StreamModelFamily fam;
    for (const auto& [begin, end, suffix] : ranges) {
        for (int order = 0; order <= max_markov_order; ++order) {
            // Keep tables desk-sized.
            double cells = std::pow(static_cast<double>(stream.alphabet_size), order + 1);
            if (cells > 4096) break;
            fam.members.push_back(
                std::make_shared<MarkovStreamModel>(stream, order, begin, end, suffix));
        }
        for (int p = 1; p <= max_period; ++p)
            fam.members.push_back(std::make_shared<PeriodicStreamModel>(
                stream, static_cast<std::size_t>(p), begin, end, suffix));
    }
    return fam;
}

namespace {

Segment classify_window(const Datastream& stream, const StreamModelFamily& family, std::size_t begin,
                        std::size_t end, double theta) {
    const double len = static_cast<double>(end - begin);
    const double stream_len = static_cast<double>(stream.symbols.size());
    double raw = len * std::log2(static_cast<double>(stream.alphabet_size));
    double best = raw;  // sending raw is always available
    for (const auto& m : family.members) {
        if (!m) continue;
        double cost = static_cast<double>(m->k_bits()) * (len / stream_len) +
                      m->cost_bits(stream, begin, end);
        best = std::min(best, cost);
    }
    Segment seg;
    seg.offset = begin;
    seg.length = end - begin;
    seg.gain_bits = raw - best;
    seg.learnable = seg.gain_bits / len >= theta;
    return seg;
}

std::vector<Segment> merge_adjacent(std::vector<Segment> segs) {
    std::vector<Segment> merged;
    for (const auto& s : segs) {
        if (!merged.empty() && merged.back().learnable == s.learnable &&
            merged.back().offset + merged.back().length == s.offset) {
            merged.back().length += s.length;
            merged.back().gain_bits += s.gain_bits;
        } else {
            merged.push_back(s);
        }
    }
    return merged;
}

}  // namespace

SplitResult split(const Datastream& stream, const StreamModelFamily& family, std::size_t window,
                  double theta) {
    check_stream(stream);
    if (window < 4) fail("window-too-small", "split window must be at least 4 symbols");
    if (theta <= 0) fail("invalid-argument", "theta must be positive");

    SplitResult result;
    if (stream.symbols.size() < window) {
        Segment seg = classify_window(stream, family, 0, stream.symbols.size(), theta);
        seg.learnable = false;  // degenerate input rule
        result.segments.push_back(seg);
        return result;
    }
    std::vector<Segment> windows;
    for (std::size_t begin = 0; begin < stream.symbols.size(); begin += window) {
        std::size_t end = std::min(begin + window, stream.symbols.size());
        windows.push_back(classify_window(stream, family, begin, end, theta));
    }
    result.segments = merge_adjacent(std::move(windows));
    return result;
}

SplitResult resplit_on_high_complexity(const Datastream& stream, const SplitResult& prior,
                                       const ComplexityReport& report, double gamma_cap) {
    check_stream(stream);
    if (report.gamma <= gamma_cap) return prior;

    std::size_t learnable_total = prior.learnable_symbols();
    if (learnable_total == 0) return prior;

    // Demote lowest-gain learnable segments first; the projected complexity
    // scales with the surviving learnable symbol count.
    std::vector<std::size_t> learnable_idx;
    for (std::size_t i = 0; i < prior.segments.size(); ++i)
        if (prior.segments[i].learnable) learnable_idx.push_back(i);
    std::sort(learnable_idx.begin(), learnable_idx.end(), [&](std::size_t a, std::size_t b) {
        const Segment& sa = prior.segments[a];
        const Segment& sb = prior.segments[b];
        if (sa.gain_bits != sb.gain_bits) return sa.gain_bits < sb.gain_bits;
        return sa.offset < sb.offset;
    });

    SplitResult out = prior;
    std::size_t remaining = learnable_total;
    for (std::size_t idx : learnable_idx) {
        double projected = report.gamma * static_cast<double>(remaining) /
                           static_cast<double>(learnable_total);
        if (projected <= gamma_cap) break;
        out.segments[idx].learnable = false;
        remaining -= out.segments[idx].length;
    }
    // Demotion can create adjacent memorizable runs.
    out.segments = merge_adjacent(std::move(out.segments));
    return out;
}

std::string serialize_split(const SplitResult& result) {
    std::ostringstream out;
    for (const auto& s : result.segments)
        out << (s.learnable ? "learnable" : "memorizable") << " " << s.offset << " " << s.length << " "
            << kv::format_number(s.gain_bits) << "\n";
    return out.str();
}

SplitResult parse_split(const std::string& text) {
    SplitResult result;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string cls;
        Segment seg;
        std::string gain;
        if (!(ls >> cls >> seg.offset >> seg.length >> gain))
            fail("io-error", "malformed split line '" + line + "'");
        if (cls == "learnable") {
            seg.learnable = true;
        } else if (cls == "memorizable") {
            seg.learnable = false;
        } else {
            fail("io-error", "unknown segment class '" + cls + "'");
        }
        seg.gain_bits = kv::parse_number(gain);
        result.segments.push_back(seg);
    }
    return result;
}

}  // namespace semcom
