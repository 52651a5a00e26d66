#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace openchain {

enum class ErrorKind {
    dimension_mismatch,
    invalid_argument,
    svd_failure,
    numerical,
    invalid_config,
    io,
};

inline const char *to_string(ErrorKind kind) {
    switch(kind) {
        case ErrorKind::dimension_mismatch: return "dimension_mismatch";
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::svd_failure: return "svd_failure";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::invalid_config: return "invalid_config";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Raised by config validation; carries every violated constraint, not just the first.
class ConfigError : public Error {
  public:
    explicit ConfigError(std::vector<std::string> violations)
        : Error(ErrorKind::invalid_config, join(violations)), violations_(std::move(violations)) {}
    [[nodiscard]] const std::vector<std::string> &violations() const noexcept { return violations_; }

  private:
    static std::string join(const std::vector<std::string> &v) {
        std::string out = "invalid configuration:";
        for(const auto &s : v) out += "\n  - " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

} // namespace openchain
