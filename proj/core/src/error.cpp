#include "teamform/error.hpp"

namespace teamform {

std::string_view to_string(ErrorCategory category) noexcept {
    switch (category) {
    case ErrorCategory::InvalidInput: return "invalid_input";
    case ErrorCategory::Domain: return "domain";
    case ErrorCategory::Protocol: return "protocol";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Numerical: return "numerical";
    }
    return "unknown";
}

int exit_code(ErrorCategory category) noexcept {
    switch (category) {
    case ErrorCategory::InvalidInput: return 3;
    case ErrorCategory::Domain: return 4;
    case ErrorCategory::Protocol: return 5;
    case ErrorCategory::Io: return 6;
    case ErrorCategory::Config: return 7;
    case ErrorCategory::Numerical: return 8;
    }
    return 1;
}

}  // namespace teamform
