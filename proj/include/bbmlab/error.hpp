#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bbm {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
    InvalidInput,
    Domain,
    Regime,
    Coverage,
    Configuration,
    Scheme,
    Precision,
    Integrity,
    Capped,
    Unsupported,
    Dependency,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Regime: return "regime";
        case ErrorKind::Coverage: return "coverage";
        case ErrorKind::Configuration: return "configuration";
        case ErrorKind::Scheme: return "scheme";
        case ErrorKind::Precision: return "precision";
        case ErrorKind::Integrity: return "integrity";
        case ErrorKind::Capped: return "capped-run";
        case ErrorKind::Unsupported: return "unsupported";
        case ErrorKind::Dependency: return "dependency";
    }
    return "unknown";
}

}  // namespace bbm
