#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "semcom/mdl.hpp"

namespace semcom {

/// A symbol stream over a dense alphabet {0, ..., alphabet_size-1}.
/// source_tags are harness-only metadata naming which ground-truth model
/// generated a span; the splitter itself never reads them.
struct Datastream {
    int alphabet_size = 2;
    std::vector<int> symbols;

    struct SourceTag {
        std::size_t offset = 0;
        std::size_t length = 0;
        std::string scm_id;
    };
    std::vector<SourceTag> source_tags;
};

/// Candidate stream model for the two-part MDL cost: a description length
/// plus a codelength for any window of a stream.
class StreamModel {
public:
    virtual ~StreamModel() = default;
    virtual const std::string& id() const = 0;
    virtual long k_bits() const = 0;
    /// -log2 likelihood of symbols [begin, end); context may reach back
    /// before `begin` into the same stream.
    virtual double cost_bits(const Datastream& stream, std::size_t begin, std::size_t end) const = 0;
};

using StreamModelPtr = std::shared_ptr<const StreamModel>;

struct StreamModelFamily {
    std::vector<StreamModelPtr> members;
};

/// Default family fitted deterministically on the stream: quantized Markov
/// models of order 0..max_markov_order and phase-locked periodic predictors
/// for every period up to max_period, each fitted on the whole stream and on
/// its thirds.
StreamModelFamily build_stream_family(const Datastream& stream, int max_markov_order = 3,
                                      int max_period = 16);

struct Segment {
    bool learnable = false;
    std::size_t offset = 0;
    std::size_t length = 0;
    double gain_bits = 0.0;  // raw cost minus best two-part cost

    bool operator==(const Segment&) const = default;
};

/// Ordered, disjoint segments exactly covering the stream.
struct SplitResult {
    std::vector<Segment> segments;

    std::size_t learnable_symbols() const;
    std::size_t total_symbols() const;
};

inline constexpr std::size_t kDefaultSplitWindow = 32;
inline constexpr double kDefaultSplitTheta = 0.25;

/// Windowed two-part MDL split: a window is learnable when the best family
/// member beats the raw cost by at least theta bits per symbol (the member's
/// description length is amortized over the whole stream). Adjacent windows
/// of the same class merge. Streams shorter than one window are memorizable
/// wholesale.
SplitResult split(const Datastream& stream, const StreamModelFamily& family,
                  std::size_t window = kDefaultSplitWindow, double theta = kDefaultSplitTheta);

/// When the language complexity exceeds gamma_cap, demotes learnable segments
/// with the lowest MDL gain until the projected complexity (proportional to
/// the surviving learnable symbols) fits the cap, or nothing learnable is left.
SplitResult resplit_on_high_complexity(const Datastream& stream, const SplitResult& prior,
                                       const ComplexityReport& report, double gamma_cap);

/// Line-oriented text form: class, offset, length, gain.
std::string serialize_split(const SplitResult& result);
SplitResult parse_split(const std::string& text);

}  // namespace semcom
