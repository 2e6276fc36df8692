#include "semcom/scm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "semcom/errors.hpp"
#include "semcom/kv.hpp"

namespace semcom {

int Scm::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].id == id) return static_cast<int>(i);
    return -1;
}

const Variable& Scm::variable(const std::string& id) const {
    int i = index_of(id);
    if (i < 0) fail("unknown-variable", "no variable '" + id + "'");
    return variables[static_cast<std::size_t>(i)];
}

const Mechanism& Scm::mechanism_for(const std::string& id) const {
    for (const auto& m : mechanisms)
        if (m.target == id) return m;
    fail("unknown-variable", "no mechanism for '" + id + "'");
}

int Scm::symbol_index(const std::string& var_id, const std::string& symbol) const {
    const Variable& v = variable(var_id);
    for (std::size_t i = 0; i < v.alphabet.size(); ++i)
        if (v.alphabet[i] == symbol) return static_cast<int>(i);
    fail("unknown-variable", "variable '" + var_id + "' has no symbol '" + symbol + "'");
}

std::vector<int> Scm::topological_order() const {
    const std::size_t n = variables.size();
    std::vector<std::vector<int>> children(n);
    std::vector<int> indegree(n, 0);
    for (const auto& m : mechanisms) {
        int t = index_of(m.target);
        if (t < 0) continue;
        for (const auto& p : m.parents) {
            int pi = index_of(p);
            if (pi < 0) continue;
            children[static_cast<std::size_t>(pi)].push_back(t);
            ++indegree[static_cast<std::size_t>(t)];
        }
    }
    std::vector<int> order;
    order.reserve(n);
    std::set<int> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) ready.insert(static_cast<int>(i));
    while (!ready.empty()) {
        int v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (int c : children[static_cast<std::size_t>(v)])
            if (--indegree[static_cast<std::size_t>(c)] == 0) ready.insert(c);
    }
    if (order.size() != n) fail("cycle-detected", "parent graph has a cycle");
    return order;
}

std::size_t Scm::assignment_states() const {
    std::size_t n = 1;
    for (const auto& v : variables) n *= std::max<std::size_t>(1, v.alphabet.size());
    return n;
}

std::size_t Scm::noise_states() const {
    std::size_t n = 1;
    for (const auto& m : mechanisms) n *= std::max<std::size_t>(1, m.noise.size());
    return n;
}

namespace {

std::size_t parent_space(const Scm& scm, const Mechanism& m) {
    std::size_t n = 1;
    for (const auto& p : m.parents) {
        int pi = scm.index_of(p);
        if (pi < 0) return 0;
        n *= scm.variables[static_cast<std::size_t>(pi)].alphabet.size();
    }
    return n;
}

}  // namespace

std::vector<ValidationIssue> validate(const Scm& scm) {
    std::vector<ValidationIssue> issues;
    std::set<std::string> seen;
    for (const auto& v : scm.variables) {
        if (!seen.insert(v.id).second)
            issues.push_back({"duplicate-variable", "variable '" + v.id + "' declared twice"});
        if (v.alphabet.empty())
            issues.push_back({"empty-alphabet", "variable '" + v.id + "' has no symbols"});
        std::set<std::string> syms(v.alphabet.begin(), v.alphabet.end());
        if (syms.size() != v.alphabet.size())
            issues.push_back({"duplicate-symbol", "variable '" + v.id + "' repeats a symbol"});
    }
    std::set<std::string> mech_targets;
    for (const auto& m : scm.mechanisms) {
        if (!mech_targets.insert(m.target).second)
            issues.push_back({"duplicate-mechanism", "two mechanisms target '" + m.target + "'"});
        int ti = scm.index_of(m.target);
        if (ti < 0) {
            issues.push_back({"unknown-variable", "mechanism targets undeclared '" + m.target + "'"});
            continue;
        }
        bool parents_ok = true;
        for (const auto& p : m.parents) {
            if (p == m.target)
                issues.push_back({"self-parent", "'" + m.target + "' lists itself as a parent"});
            if (scm.index_of(p) < 0) {
                issues.push_back({"unknown-variable",
                                  "mechanism for '" + m.target + "' references undeclared '" + p + "'"});
                parents_ok = false;
            }
        }
        if (m.noise.empty()) {
            issues.push_back({"unnormalized-noise", "mechanism for '" + m.target + "' has empty noise pmf"});
        } else {
            double s = 0;
            bool nonneg = true;
            for (double w : m.noise) {
                s += w;
                nonneg = nonneg && w >= 0;
            }
            if (!nonneg || std::abs(s - 1.0) > kMassTolerance)
                issues.push_back({"unnormalized-noise",
                                  "noise pmf for '" + m.target + "' sums to " + kv::format_number(s)});
        }
        if (parents_ok) {
            std::size_t expected = parent_space(scm, m) * std::max<std::size_t>(1, m.noise.size());
            if (m.table.size() != expected) {
                issues.push_back({"incomplete-table",
                                  "table for '" + m.target + "' has " + std::to_string(m.table.size()) +
                                      " entries, expected " + std::to_string(expected)});
            } else {
                int card = static_cast<int>(scm.variables[static_cast<std::size_t>(ti)].alphabet.size());
                for (int e : m.table)
                    if (e < 0 || e >= card) {
                        issues.push_back({"incomplete-table",
                                          "table for '" + m.target + "' maps to an out-of-range symbol"});
                        break;
                    }
            }
        }
    }
    for (const auto& v : scm.variables)
        if (!mech_targets.count(v.id))
            issues.push_back({"missing-mechanism", "variable '" + v.id + "' has no mechanism"});
    // Cycle check only makes sense once the reference structure is sound.
    bool structurally_sound =
        std::all_of(issues.begin(), issues.end(), [](const ValidationIssue& i) {
            return i.code != "unknown-variable" && i.code != "duplicate-variable" &&
                   i.code != "duplicate-mechanism";
        });
    if (structurally_sound) {
        try {
            (void)scm.topological_order();
        } catch (const Error& e) {
            issues.push_back({"cycle-detected", e.what()});
        }
    }
    return issues;
}

void ensure_valid(const Scm& scm) {
    auto issues = validate(scm);
    if (!issues.empty()) fail(issues.front().code, issues.front().detail);
}

namespace {

// Mechanisms aligned with variable order plus precomputed parent indices.
struct Compiled {
    std::vector<const Mechanism*> mech;      // per variable
    std::vector<std::vector<int>> parents;   // per variable, variable indices
    std::vector<int> topo;
};

Compiled compile(const Scm& scm) {
    Compiled c;
    c.mech.resize(scm.variables.size(), nullptr);
    c.parents.resize(scm.variables.size());
    for (const auto& m : scm.mechanisms) {
        int t = scm.index_of(m.target);
        c.mech[static_cast<std::size_t>(t)] = &m;
        for (const auto& p : m.parents)
            c.parents[static_cast<std::size_t>(t)].push_back(scm.index_of(p));
    }
    c.topo = scm.topological_order();
    return c;
}

int table_lookup(const Scm& scm, const Compiled& c, int var, const std::vector<int>& assignment,
                 int noise_index) {
    const Mechanism& m = *c.mech[static_cast<std::size_t>(var)];
    std::size_t pa = 0;
    for (std::size_t k = 0; k < m.parents.size(); ++k) {
        int pi = c.parents[static_cast<std::size_t>(var)][k];
        pa = pa * scm.variables[static_cast<std::size_t>(pi)].alphabet.size() +
             static_cast<std::size_t>(assignment[static_cast<std::size_t>(pi)]);
    }
    return m.table[pa * m.noise.size() + static_cast<std::size_t>(noise_index)];
}

// Propagates one joint-noise realization through the mechanisms; overrides, when
// present, pin intervened variables to constants.
std::vector<int> propagate(const Scm& scm, const Compiled& c, const std::vector<int>& noise_combo,
                           const std::map<int, int>* overrides = nullptr) {
    std::vector<int> a(scm.variables.size(), 0);
    for (int v : c.topo) {
        if (overrides) {
            auto it = overrides->find(v);
            if (it != overrides->end()) {
                a[static_cast<std::size_t>(v)] = it->second;
                continue;
            }
        }
        a[static_cast<std::size_t>(v)] =
            table_lookup(scm, c, v, a, noise_combo[static_cast<std::size_t>(v)]);
    }
    return a;
}

// Iterates the joint noise space (one index per variable's mechanism) and
// feeds (combo, prior probability) to fn.
template <typename Fn>
void for_each_noise(const Scm& scm, const Compiled& c, Fn&& fn) {
    const std::size_t n = scm.variables.size();
    std::vector<int> combo(n, 0);
    while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            w *= c.mech[i]->noise[static_cast<std::size_t>(combo[i])];
        if (w > 0) fn(combo, w);
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (++combo[i] < static_cast<int>(c.mech[i]->noise.size())) break;
            combo[i] = 0;
            if (i == 0) return;
        }
        if (n == 0) return;
    }
}

void check_enumeration_bound(const Scm& scm) {
    if (scm.assignment_states() > kMaxEnumerationStates || scm.noise_states() > kMaxEnumerationStates)
        fail("state-space-too-large", "exact enumeration is capped at 2^24 states");
}

std::map<int, int> override_map(const Scm& scm, const Intervention& iv) {
    std::map<int, int> o;
    for (const auto& [id, sym] : iv.assignments)
        o[scm.index_of(id)] = scm.symbol_index(id, sym);
    return o;
}

std::map<std::string, int> evidence_indices(const Scm& scm, const std::map<std::string, std::string>& ev) {
    std::map<std::string, int> out;
    for (const auto& [id, sym] : ev) out[id] = scm.symbol_index(id, sym);
    return out;
}

JointPmf empty_joint(const Scm& scm) {
    std::vector<std::string> ids;
    std::vector<int> cards;
    for (const auto& v : scm.variables) {
        ids.push_back(v.id);
        cards.push_back(static_cast<int>(v.alphabet.size()));
    }
    return JointPmf(ids, cards);
}

}  // namespace

JointPmf joint_distribution(const Scm& scm) {
    ensure_valid(scm);
    check_enumeration_bound(scm);
    Compiled c = compile(scm);
    JointPmf joint = empty_joint(scm);
    for_each_noise(scm, c, [&](const std::vector<int>& combo, double w) {
        joint.at(joint.flat_index(propagate(scm, c, combo))) += w;
    });
    return joint;
}

std::vector<int> sample(const Scm& scm, std::uint64_t seed) {
    ensure_valid(scm);
    Compiled c = compile(scm);
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    std::vector<int> a(scm.variables.size(), 0);
    for (int v : c.topo) {
        const Mechanism& m = *c.mech[static_cast<std::size_t>(v)];
        double u = uniform();
        int e = 0;
        double cum = 0;
        for (std::size_t k = 0; k < m.noise.size(); ++k) {
            cum += m.noise[k];
            if (u < cum || k + 1 == m.noise.size()) {
                e = static_cast<int>(k);
                break;
            }
        }
        a[static_cast<std::size_t>(v)] = table_lookup(scm, c, v, a, e);
    }
    return a;
}

Scm apply_do(const Scm& scm, const Intervention& iv) {
    for (const auto& [id, sym] : iv.assignments) (void)scm.symbol_index(id, sym);
    Scm out = scm;
    for (auto& m : out.mechanisms) {
        auto it = iv.assignments.find(m.target);
        if (it == iv.assignments.end()) continue;
        m.parents.clear();
        m.noise = {1.0};
        m.table = {scm.symbol_index(m.target, it->second)};
    }
    return out;
}

Pmf interventional_distribution(const Scm& scm, const Intervention& iv, const std::string& target) {
    Scm mutilated = apply_do(scm, iv);
    JointPmf joint = joint_distribution(mutilated);
    if (!iv.conditioning.empty()) {
        auto conditioned = joint.condition(evidence_indices(scm, iv.conditioning));
        if (!conditioned)
            fail("zero-probability-conditioning", "conditioning event has zero mass under do()");
        joint = std::move(*conditioned);
    }
    return joint.marginal(target);
}

JointPmf counterfactual_joint(const Scm& scm, const CounterfactualQuery& q) {
    ensure_valid(scm);
    check_enumeration_bound(scm);
    (void)scm.variable(q.target);
    Compiled c = compile(scm);
    auto factual = evidence_indices(scm, q.factual);
    auto overrides = override_map(scm, q.intervention);

    // Abduction: posterior over joint noise given the factual evidence,
    // marginalizing any unobserved variables.
    std::vector<std::pair<std::vector<int>, double>> posterior;
    double mass = 0;
    for_each_noise(scm, c, [&](const std::vector<int>& combo, double w) {
        auto a = propagate(scm, c, combo);
        for (const auto& [id, sym] : factual)
            if (a[static_cast<std::size_t>(scm.index_of(id))] != sym) return;
        posterior.emplace_back(combo, w);
        mass += w;
    });
    if (mass <= 0) fail("impossible-factual", "factual evidence has zero probability");

    // Action + prediction: push the posterior through the mutilated mechanisms.
    JointPmf joint = empty_joint(scm);
    for (const auto& [combo, w] : posterior)
        joint.at(joint.flat_index(propagate(scm, c, combo, &overrides))) += w / mass;

    if (!q.intervention.conditioning.empty()) {
        auto conditioned = joint.condition(evidence_indices(scm, q.intervention.conditioning));
        if (!conditioned)
            fail("zero-probability-conditioning", "conditioning event has zero mass in the counterfactual");
        joint = std::move(*conditioned);
    }
    return joint;
}

Pmf counterfactual(const Scm& scm, const CounterfactualQuery& q) {
    return counterfactual_joint(scm, q).marginal(q.target);
}

namespace {

void require_token(const std::string& s, const std::string& what) {
    if (s.empty()) fail("io-error", what + " must be non-empty");
    for (char c : s)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '{' || c == '}' || c == '#')
            fail("io-error", what + " '" + s + "' contains reserved characters");
}

}  // namespace

std::string serialize_scm(const Scm& scm) {
    std::vector<const Variable*> vars;
    for (const auto& v : scm.variables) vars.push_back(&v);
    std::sort(vars.begin(), vars.end(),
              [](const Variable* a, const Variable* b) { return a->id < b->id; });
    std::vector<const Mechanism*> mechs;
    for (const auto& m : scm.mechanisms) mechs.push_back(&m);
    std::sort(mechs.begin(), mechs.end(),
              [](const Mechanism* a, const Mechanism* b) { return a->target < b->target; });

    kv::Node root;
    root.block = true;
    {
        kv::Node n;
        n.key = "scm";
        n.values = {"1"};
        root.children.push_back(n);
    }
    for (const Variable* v : vars) {
        require_token(v->id, "variable id");
        kv::Node n;
        n.key = "variable";
        n.values = {v->id};
        n.block = true;
        kv::Node alpha;
        alpha.key = "alphabet";
        for (const auto& s : v->alphabet) {
            require_token(s, "symbol");
            alpha.values.push_back(s);
        }
        n.children.push_back(alpha);
        root.children.push_back(n);
    }
    for (const Mechanism* m : mechs) {
        kv::Node n;
        n.key = "mechanism";
        n.values = {m->target};
        n.block = true;
        kv::Node parents;
        parents.key = "parents";
        parents.values.assign(m->parents.begin(), m->parents.end());
        kv::Node noise;
        noise.key = "noise";
        for (double w : m->noise) noise.values.push_back(kv::format_number(w));
        kv::Node table;
        table.key = "table";
        for (int e : m->table) table.values.push_back(std::to_string(e));
        n.children.push_back(parents);
        n.children.push_back(noise);
        n.children.push_back(table);
        root.children.push_back(n);
    }
    return kv::write(root);
}

Scm parse_scm(const std::string& text) {
    kv::Node root = kv::parse(text);
    const kv::Node* header = root.find("scm");
    if (!header || header->values.empty() || header->values[0] != "1")
        fail("io-error", "missing or unsupported scm header");
    Scm scm;
    for (const kv::Node* vn : root.find_all("variable")) {
        if (vn->values.empty()) fail("io-error", "variable block without id");
        Variable v;
        v.id = vn->values[0];
        const kv::Node* alpha = vn->find("alphabet");
        if (alpha) v.alphabet = alpha->values;
        scm.variables.push_back(std::move(v));
    }
    for (const kv::Node* mn : root.find_all("mechanism")) {
        if (mn->values.empty()) fail("io-error", "mechanism block without target");
        Mechanism m;
        m.target = mn->values[0];
        if (const kv::Node* p = mn->find("parents")) m.parents = p->values;
        if (const kv::Node* nz = mn->find("noise"))
            for (const auto& t : nz->values) m.noise.push_back(kv::parse_number(t));
        if (const kv::Node* tb = mn->find("table"))
            for (const auto& t : tb->values)
                m.table.push_back(static_cast<int>(kv::parse_number(t)));
        scm.mechanisms.push_back(std::move(m));
    }
    return scm;
}

}  // namespace semcom
