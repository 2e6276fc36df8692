#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semcom/bits.hpp"
#include "semcom/scm.hpp"

namespace semcom {

/// Every serialized model starts with [magic, version, kind]; the constant-model
/// member therefore never measures below this.
inline constexpr long kModelHeaderBits = 24;

/// A candidate conditional model p(representation | input). Scoring and the
/// canonical serialization (whose bit length is the description-length proxy
/// for K) must agree: what is scored is exactly what is written.
class ConditionalModel {
public:
    virtual ~ConditionalModel() = default;
    virtual const std::string& id() const = 0;
    virtual double prob(const std::string& input, const std::string& rep) const = 0;
    virtual std::vector<std::uint8_t> serialize() const = 0;
};

using ModelPtr = std::shared_ptr<const ConditionalModel>;

struct ModelFamily {
    std::vector<ModelPtr> members;
};

/// Always predicts one representation.
ModelPtr make_constant_model(std::string id, std::string rep);
/// Uniform over a fixed representation set.
ModelPtr make_uniform_model(std::string id, std::vector<std::string> reps);
/// Table lookup with smoothing eps (quantized to 8 bits); inputs outside the
/// table score uniformly over the representation set.
ModelPtr make_lookup_model(std::string id, std::map<std::string, std::string> table,
                           std::vector<std::string> reps, double eps = 0.0);

struct ScoredPair {
    std::string input;
    std::string rep;
};

struct ComplexityReport {
    double gamma = 0;        // minimized objective, bits
    std::string chosen_model;
    double loss = 0;         // cross-entropy of the chosen model, bits
    long k = 0;              // description length of the chosen model, bits
    double lambda = 1.0;
    long t = 0;              // K of the chosen model (the achieved budget)
};

/// Sum of -log2 p(rep | input) over the pairs; throws zero-probability-pair
/// when the model assigns p = 0 anywhere.
double cross_entropy_loss(const ConditionalModel& model, const std::vector<ScoredPair>& pairs);

/// Bit length of the canonical serialization.
long description_length_bits(const ConditionalModel& model);

/// Exhaustive min over the family of loss + K. Members assigning zero
/// probability to some pair are excluded; ties break on smaller K, then id.
ComplexityReport language_complexity(const ModelFamily& family, const std::vector<ScoredPair>& pairs);

/// Best achievable loss under the budget K <= t_bits.
double structure_function(const ModelFamily& family, const std::vector<ScoredPair>& pairs, long t_bits);

/// Exhaustive min of loss + lambda * K.
ComplexityReport lagrangian_complexity(const ModelFamily& family, const std::vector<ScoredPair>& pairs,
                                       double lambda);

/// Psi evaluated at every achievable budget (the family's distinct K values).
std::map<long, double> structure_function_profile(const ModelFamily& family,
                                                  const std::vector<ScoredPair>& pairs);

/// Checks Gamma_lambda == min over achievable budgets t of Psi(t) + lambda t.
bool legendre_consistency(const ModelFamily& family, const std::vector<ScoredPair>& pairs,
                          const std::vector<double>& lambda_grid);

/// Same check against a caller-supplied Psi profile (e.g. a cached one).
bool legendre_consistency_with_profile(const ModelFamily& family, const std::vector<ScoredPair>& pairs,
                                       const std::vector<double>& lambda_grid,
                                       const std::map<long, double>& psi);

/// A dictionary entry: the bit-encoded description of a mechanism subgraph.
struct Representation {
    std::string id;
    Scm payload;

    bool operator==(const Representation&) const = default;
};

Bits encode(const Representation& rep);
Representation decode(const Bits& bits);  // throws malformed-bits

struct SemanticLanguage {
    std::map<std::string, Representation> entries;  // content element id -> representation
    std::string model_id;
};

/// Throws duplicate-representation when two entries share a representation id.
void check_language(const SemanticLanguage& lang);

/// Text dictionary: content ids with hex-encoded representation bits plus the
/// chosen model id. Loadable by the protocol module and the CLI.
std::string serialize_language(const SemanticLanguage& lang);
SemanticLanguage parse_language(const std::string& text);

}  // namespace semcom
