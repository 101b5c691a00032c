#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fxrp {

enum class ErrorKind {
    parse,
    domain,
    continuity,
    insufficient_data,
    parameter,
    degenerate_input,
    singular_design,
    numerical,
    filter_divergence,
    covariance_domain,
    unsupported_process,
    io,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse: return "parse";
        case ErrorKind::domain: return "domain";
        case ErrorKind::continuity: return "continuity";
        case ErrorKind::insufficient_data: return "insufficient_data";
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::degenerate_input: return "degenerate_input";
        case ErrorKind::singular_design: return "singular_design";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::filter_divergence: return "filter_divergence";
        case ErrorKind::covariance_domain: return "covariance_domain";
        case ErrorKind::unsupported_process: return "unsupported_process";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace fxrp
