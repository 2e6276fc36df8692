#pragma once

#include <stdexcept>
#include <string>

namespace semcom {

/// Runtime error carrying a stable machine-readable code (e.g. "cycle-detected",
/// "budget-infeasible") next to the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace semcom
