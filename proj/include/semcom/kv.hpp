#pragma once

#include <optional>
#include <string>
#include <vector>

namespace semcom::kv {

/// One node of the nested key-value text format:
///
///   key value value...
///   key {
///     subkey value
///   }
///
/// '#' starts a comment. Keys and values are whitespace-separated tokens.
struct Node {
    std::string key;
    std::vector<std::string> values;
    std::vector<Node> children;
    bool block = false;

    const Node* find(const std::string& k) const;
    std::vector<const Node*> find_all(const std::string& k) const;

    /// Single-value accessors; fall back to def when the key is absent.
    std::string get_str(const std::string& k, const std::string& def = "") const;
    double get_num(const std::string& k, double def) const;
    long long get_int(const std::string& k, long long def) const;
    bool get_bool(const std::string& k, bool def) const;
};

/// Parses a whole document into a synthetic root node (key empty, block=true).
Node parse(const std::string& text);
Node parse_file(const std::string& path);

std::string write(const Node& root);

/// Canonical text for a double: shortest round-trip form.
std::string format_number(double v);
double parse_number(const std::string& token);

}  // namespace semcom::kv
