#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace xlwm {

// Error with a short stable code ("empty-corpus", "too-short", ...) used by
// the CLI and tests, plus a human-readable detail message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace xlwm
