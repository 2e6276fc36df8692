#include "semcom/kv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "semcom/errors.hpp"

namespace semcom::kv {

const Node* Node::find(const std::string& k) const {
    for (const auto& c : children)
        if (c.key == k) return &c;
    return nullptr;
}

std::vector<const Node*> Node::find_all(const std::string& k) const {
    std::vector<const Node*> out;
    for (const auto& c : children)
        if (c.key == k) out.push_back(&c);
    return out;
}

std::string Node::get_str(const std::string& k, const std::string& def) const {
    const Node* n = find(k);
    if (!n || n->values.empty()) return def;
    return n->values.front();
}

double Node::get_num(const std::string& k, double def) const {
    const Node* n = find(k);
    if (!n || n->values.empty()) return def;
    return parse_number(n->values.front());
}

long long Node::get_int(const std::string& k, long long def) const {
    const Node* n = find(k);
    if (!n || n->values.empty()) return def;
    long long v = 0;
    auto [p, ec] = std::from_chars(n->values.front().data(),
                                   n->values.front().data() + n->values.front().size(), v);
    if (ec != std::errc() || p != n->values.front().data() + n->values.front().size())
        fail("config-error", "expected integer for key '" + k + "'");
    return v;
}

bool Node::get_bool(const std::string& k, bool def) const {
    const Node* n = find(k);
    if (!n || n->values.empty()) return def;
    const std::string& v = n->values.front();
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail("config-error", "expected boolean for key '" + k + "'");
}

static std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : line) {
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r') {
            if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Node parse(const std::string& text) {
    Node root;
    root.block = true;
    std::vector<Node*> stack{&root};
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() == 1 && tokens[0] == "}") {
            if (stack.size() == 1)
                fail("config-error", "unmatched '}' at line " + std::to_string(lineno));
            stack.pop_back();
            continue;
        }
        Node node;
        node.key = tokens[0];
        bool opens = tokens.back() == "{";
        node.values.assign(tokens.begin() + 1, tokens.end() - (opens ? 1 : 0));
        node.block = opens;
        // Braces only open or close a block on their own line boundary.
        for (const auto& v : node.values)
            if (v == "{" || v == "}")
                fail("config-error", "misplaced brace at line " + std::to_string(lineno) +
                                         " (blocks span whole lines)");
        if (node.key == "{" || node.key == "}")
            fail("config-error", "misplaced brace at line " + std::to_string(lineno));
        stack.back()->children.push_back(std::move(node));
        if (opens) stack.push_back(&stack.back()->children.back());
    }
    if (stack.size() != 1) fail("config-error", "unterminated block at end of input");
    return root;
}

Node parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

static void write_node(const Node& n, int depth, std::string& out) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += n.key;
    for (const auto& v : n.values) {
        out += ' ';
        out += v;
    }
    if (n.block) {
        out += " {\n";
        for (const auto& c : n.children) write_node(c, depth + 1, out);
        out.append(static_cast<std::size_t>(depth) * 2, ' ');
        out += "}\n";
    } else {
        out += '\n';
    }
}

std::string write(const Node& root) {
    std::string out;
    for (const auto& c : root.children) write_node(c, 0, out);
    return out;
}

std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) fail("io-error", "number formatting failed");
    return std::string(buf, p);
}

double parse_number(const std::string& token) {
    double v = 0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size())
        fail("config-error", "expected number, got '" + token + "'");
    return v;
}

}  // namespace semcom::kv
