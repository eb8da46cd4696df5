#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace teamform {

// Machine-readable failure classes; the CLI maps each to its own exit code.
enum class ErrorCategory {
    InvalidInput,  // malformed arguments, bad records, violated preconditions
    Domain,        // mathematically undefined results (empty group, zero mean)
    Protocol,      // illegal team-assembly transition
    Io,            // file system failures
    Config,        // bad experiment configuration
    Numerical,     // estimator failure (separation, singular information)
};

std::string_view to_string(ErrorCategory category) noexcept;
int exit_code(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
    throw Error(category, message);
}

inline void require(bool condition, ErrorCategory category, const std::string& message) {
    if (!condition) fail(category, message);
}

}  // namespace teamform
