#include "semcom/mdl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "semcom/byteio.hpp"
#include "semcom/errors.hpp"
#include "semcom/kv.hpp"

namespace semcom {

namespace {

constexpr std::uint8_t kModelMagic = 0x4D;
constexpr std::uint8_t kModelVersion = 1;
constexpr std::uint8_t kKindConstant = 0;
constexpr std::uint8_t kKindUniform = 1;
constexpr std::uint8_t kKindLookup = 2;

void write_header(ByteWriter& w, std::uint8_t kind) {
    w.u8(kModelMagic);
    w.u8(kModelVersion);
    w.u8(kind);
}

class ConstantModel final : public ConditionalModel {
public:
    ConstantModel(std::string id, std::string rep) : id_(std::move(id)), rep_(std::move(rep)) {}
    const std::string& id() const override { return id_; }
    double prob(const std::string&, const std::string& rep) const override {
        return rep == rep_ ? 1.0 : 0.0;
    }
    std::vector<std::uint8_t> serialize() const override {
        ByteWriter w;
        write_header(w, kKindConstant);
        w.str(id_);
        w.str(rep_);
        return w.bytes();
    }

private:
    std::string id_;
    std::string rep_;
};

class UniformModel final : public ConditionalModel {
public:
    UniformModel(std::string id, std::vector<std::string> reps)
        : id_(std::move(id)), reps_(std::move(reps)) {
        if (reps_.empty()) fail("invalid-argument", "uniform model needs a representation set");
        std::sort(reps_.begin(), reps_.end());
    }
    const std::string& id() const override { return id_; }
    double prob(const std::string&, const std::string& rep) const override {
        return std::binary_search(reps_.begin(), reps_.end(), rep)
                   ? 1.0 / static_cast<double>(reps_.size())
                   : 0.0;
    }
    std::vector<std::uint8_t> serialize() const override {
        ByteWriter w;
        write_header(w, kKindUniform);
        w.str(id_);
        w.u16(static_cast<std::uint16_t>(reps_.size()));
        for (const auto& r : reps_) w.str(r);
        return w.bytes();
    }

private:
    std::string id_;
    std::vector<std::string> reps_;
};

class LookupModel final : public ConditionalModel {
public:
    LookupModel(std::string id, std::map<std::string, std::string> table,
                std::vector<std::string> reps, double eps)
        : id_(std::move(id)), table_(std::move(table)), reps_(std::move(reps)) {
        if (reps_.empty()) fail("invalid-argument", "lookup model needs a representation set");
        std::sort(reps_.begin(), reps_.end());
        // The scored smoothing equals the serialized (8-bit quantized) value.
        eps_byte_ = static_cast<std::uint8_t>(std::lround(std::clamp(eps, 0.0, 1.0) * 255.0));
        eps_ = static_cast<double>(eps_byte_) / 255.0;
    }
    const std::string& id() const override { return id_; }
    double prob(const std::string& input, const std::string& rep) const override {
        if (!std::binary_search(reps_.begin(), reps_.end(), rep)) return 0.0;
        auto it = table_.find(input);
        if (it == table_.end()) return 1.0 / static_cast<double>(reps_.size());
        if (reps_.size() == 1) return rep == it->second ? 1.0 : 0.0;
        if (rep == it->second) return 1.0 - eps_;
        return eps_ / static_cast<double>(reps_.size() - 1);
    }
    std::vector<std::uint8_t> serialize() const override {
        ByteWriter w;
        write_header(w, kKindLookup);
        w.str(id_);
        w.u8(eps_byte_);
        w.u16(static_cast<std::uint16_t>(reps_.size()));
        for (const auto& r : reps_) w.str(r);
        w.u16(static_cast<std::uint16_t>(table_.size()));
        for (const auto& [input, rep] : table_) {
            w.str(input);
            w.str(rep);
        }
        return w.bytes();
    }

private:
    std::string id_;
    std::map<std::string, std::string> table_;
    std::vector<std::string> reps_;
    double eps_;
    std::uint8_t eps_byte_;
};

}  // namespace

ModelPtr make_constant_model(std::string id, std::string rep) {
    return std::make_shared<ConstantModel>(std::move(id), std::move(rep));
}

ModelPtr make_uniform_model(std::string id, std::vector<std::string> reps) {
    return std::make_shared<UniformModel>(std::move(id), std::move(reps));
}

ModelPtr make_lookup_model(std::string id, std::map<std::string, std::string> table,
                           std::vector<std::string> reps, double eps) {
    return std::make_shared<LookupModel>(std::move(id), std::move(table), std::move(reps), eps);
}

double cross_entropy_loss(const ConditionalModel& model, const std::vector<ScoredPair>& pairs) {
    double bits = 0;
    for (const auto& pair : pairs) {
        double p = model.prob(pair.input, pair.rep);
        if (p <= 0)
            fail("zero-probability-pair",
                 "model '" + model.id() + "' assigns zero probability to a pair");
        bits -= std::log2(p);
    }
    return bits;
}

long description_length_bits(const ConditionalModel& model) {
    return static_cast<long>(model.serialize().size()) * 8;
}

namespace {

struct Scored {
    const ConditionalModel* model;
    double loss;
    long k;
};

// Loss of every member that can score all pairs; members assigning zero
// probability anywhere are excluded (infinite loss).
std::vector<Scored> score_family(const ModelFamily& family, const std::vector<ScoredPair>& pairs) {
    std::vector<Scored> out;
    for (const auto& m : family.members) {
        if (!m) continue;
        double loss = 0;
        bool feasible = true;
        for (const auto& pair : pairs) {
            double p = m->prob(pair.input, pair.rep);
            if (p <= 0) {
                feasible = false;
                break;
            }
            loss -= std::log2(p);
        }
        if (feasible) out.push_back({m.get(), loss, description_length_bits(*m)});
    }
    return out;
}

ComplexityReport minimize(const std::vector<Scored>& scored, double lambda) {
    const Scored* best = nullptr;
    double best_obj = std::numeric_limits<double>::infinity();
    for (const auto& s : scored) {
        double obj = s.loss + lambda * static_cast<double>(s.k);
        bool better =
            !best || obj < best_obj ||
            (obj == best_obj && (s.k < best->k || (s.k == best->k && s.model->id() < best->model->id())));
        if (better) {
            best = &s;
            best_obj = obj;
        }
    }
    if (!best) fail("no-feasible-model", "no family member can score every pair");
    ComplexityReport r;
    r.gamma = best_obj;
    r.chosen_model = best->model->id();
    r.loss = best->loss;
    r.k = best->k;
    r.lambda = lambda;
    r.t = best->k;
    return r;
}

}  // namespace

ComplexityReport language_complexity(const ModelFamily& family, const std::vector<ScoredPair>& pairs) {
    return minimize(score_family(family, pairs), 1.0);
}

double structure_function(const ModelFamily& family, const std::vector<ScoredPair>& pairs, long t_bits) {
    bool any_within_budget = false;
    for (const auto& m : family.members)
        if (m && description_length_bits(*m) <= t_bits) any_within_budget = true;
    if (!any_within_budget) fail("budget-infeasible", "no family member fits the bit budget");
    auto scored = score_family(family, pairs);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : scored)
        if (s.k <= t_bits) best = std::min(best, s.loss);
    if (!std::isfinite(best))
        fail("no-feasible-model", "every member within the budget assigns zero probability somewhere");
    return best;
}

ComplexityReport lagrangian_complexity(const ModelFamily& family, const std::vector<ScoredPair>& pairs,
                                       double lambda) {
    if (lambda < 0) fail("invalid-argument", "lambda must be nonnegative");
    return minimize(score_family(family, pairs), lambda);
}

std::map<long, double> structure_function_profile(const ModelFamily& family,
                                                  const std::vector<ScoredPair>& pairs) {
    auto scored = score_family(family, pairs);
    if (scored.empty()) fail("no-feasible-model", "no family member can score every pair");
    std::map<long, double> psi;
    for (const auto& s : scored) psi[s.k] = std::numeric_limits<double>::infinity();
    for (auto& [t, value] : psi)
        for (const auto& s : scored)
            if (s.k <= t) value = std::min(value, s.loss);
    return psi;
}

bool legendre_consistency_with_profile(const ModelFamily& family, const std::vector<ScoredPair>& pairs,
                                       const std::vector<double>& lambda_grid,
                                       const std::map<long, double>& psi) {
    if (lambda_grid.empty()) fail("invalid-argument", "lambda grid must be nonempty");
    if (psi.empty()) fail("invalid-argument", "empty structure-function profile");
    for (double lambda : lambda_grid) {
        double lhs = lagrangian_complexity(family, pairs, lambda).gamma;
        double rhs = std::numeric_limits<double>::infinity();
        for (const auto& [t, value] : psi)
            rhs = std::min(rhs, value + lambda * static_cast<double>(t));
        if (std::abs(lhs - rhs) > kDistributionTolerance) return false;
    }
    return true;
}

bool legendre_consistency(const ModelFamily& family, const std::vector<ScoredPair>& pairs,
                          const std::vector<double>& lambda_grid) {
    return legendre_consistency_with_profile(family, pairs, lambda_grid,
                                             structure_function_profile(family, pairs));
}

namespace {

constexpr std::uint8_t kRepMagic = 0xC5;
constexpr std::uint8_t kRepVersion = 1;

}  // namespace

Bits encode(const Representation& rep) {
    ByteWriter w;
    w.u8(kRepMagic);
    w.u8(kRepVersion);
    w.str(rep.id);
    const Scm& scm = rep.payload;
    if (scm.variables.size() > 0xFFFF) fail("io-error", "payload too large to encode");
    w.u16(static_cast<std::uint16_t>(scm.variables.size()));
    for (const auto& v : scm.variables) {
        if (v.alphabet.size() > 0xFF) fail("io-error", "alphabet too large to encode");
        w.str(v.id);
        w.u8(static_cast<std::uint8_t>(v.alphabet.size()));
        for (const auto& s : v.alphabet) w.str(s);
    }
    if (scm.mechanisms.size() > 0xFFFF) fail("io-error", "payload too large to encode");
    w.u16(static_cast<std::uint16_t>(scm.mechanisms.size()));
    for (const auto& m : scm.mechanisms) {
        w.str(m.target);
        if (m.parents.size() > 0xFF) fail("io-error", "too many parents to encode");
        w.u8(static_cast<std::uint8_t>(m.parents.size()));
        for (const auto& p : m.parents) w.str(p);
        if (m.noise.size() > 0xFFFF) fail("io-error", "noise alphabet too large to encode");
        w.u16(static_cast<std::uint16_t>(m.noise.size()));
        for (double x : m.noise) w.f64(x);
        if (m.table.size() > 0xFFFFFF) fail("io-error", "table too large to encode");
        w.u8(static_cast<std::uint8_t>((m.table.size() >> 16) & 0xFF));
        w.u16(static_cast<std::uint16_t>(m.table.size() & 0xFFFF));
        for (int e : m.table) {
            if (e < 0 || e > 0xFF) fail("io-error", "table symbol index out of encodable range");
            w.u8(static_cast<std::uint8_t>(e));
        }
    }
    return Bits::from_bytes(w.bytes());
}

Representation decode(const Bits& bits) {
    if (bits.size() % 8 != 0) fail("malformed-bits", "encoding is not byte aligned");
    ByteReader r(bits.bytes());
    if (r.u8() != kRepMagic) fail("malformed-bits", "bad magic byte");
    if (r.u8() != kRepVersion) fail("malformed-bits", "unsupported encoding version");
    Representation rep;
    rep.id = r.str();
    std::size_t nvars = r.u16();
    for (std::size_t i = 0; i < nvars; ++i) {
        Variable v;
        v.id = r.str();
        std::size_t nsym = r.u8();
        for (std::size_t k = 0; k < nsym; ++k) v.alphabet.push_back(r.str());
        rep.payload.variables.push_back(std::move(v));
    }
    std::size_t nmech = r.u16();
    for (std::size_t i = 0; i < nmech; ++i) {
        Mechanism m;
        m.target = r.str();
        std::size_t npar = r.u8();
        for (std::size_t k = 0; k < npar; ++k) m.parents.push_back(r.str());
        std::size_t nnoise = r.u16();
        for (std::size_t k = 0; k < nnoise; ++k) m.noise.push_back(r.f64());
        std::size_t ntable = (static_cast<std::size_t>(r.u8()) << 16) | r.u16();
        for (std::size_t k = 0; k < ntable; ++k) m.table.push_back(r.u8());
        rep.payload.mechanisms.push_back(std::move(m));
    }
    if (!r.exhausted()) fail("malformed-bits", "trailing bytes after encoding");
    return rep;
}

void check_language(const SemanticLanguage& lang) {
    std::set<std::string> rep_ids;
    for (const auto& [content, rep] : lang.entries)
        if (!rep_ids.insert(rep.id).second)
            fail("duplicate-representation",
                 "representation id '" + rep.id + "' is shared by two entries");
}

std::string serialize_language(const SemanticLanguage& lang) {
    check_language(lang);
    std::ostringstream out;
    out << "semlang 1\n";
    out << "model " << (lang.model_id.empty() ? "-" : lang.model_id) << "\n";
    for (const auto& [content, rep] : lang.entries) {
        Bits bits = encode(rep);
        out << "entry " << content << " " << bits.size() << " " << bits.to_hex() << "\n";
    }
    return out.str();
}

SemanticLanguage parse_language(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    SemanticLanguage lang;
    bool header_seen = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key.empty() || key[0] == '#') continue;
        if (key == "semlang") {
            std::string version;
            ls >> version;
            if (version != "1") fail("io-error", "unsupported semlang version");
            header_seen = true;
        } else if (key == "model") {
            std::string id;
            ls >> id;
            lang.model_id = id == "-" ? "" : id;
        } else if (key == "entry") {
            std::string content, hex;
            std::size_t nbits = 0;
            if (!(ls >> content >> nbits >> hex)) fail("io-error", "malformed entry line");
            lang.entries[content] = decode(Bits::from_hex(hex, nbits));
        } else {
            fail("io-error", "unknown dictionary line '" + key + "'");
        }
    }
    if (!header_seen) fail("io-error", "missing semlang header");
    check_language(lang);
    return lang;
}

}  // namespace semcom
