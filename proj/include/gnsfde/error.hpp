#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace gnsfde {

enum class ErrorKind {
    Domain,      // argument outside the mathematical domain of an operation
    Config,      // invalid configuration (grids, bounds, budgets, stability)
    Input,       // invalid data values (non-finite samples, bad initial data)
    Usage,       // API misuse (missing control, mismatched grids)
    Step,        // implicit neutral solve failed to converge
    Divergence,  // state left the configured clamp
    Estimation,  // Monte-Carlo estimate could not be formed
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception of the library. Carries an optional config field path
/// (for configuration errors) and an optional step index (for numerical
/// failures inside a time march).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message,
          std::optional<std::string> field = std::nullopt,
          std::optional<std::size_t> step = std::nullopt)
        : std::runtime_error(message), kind_(kind), field_(std::move(field)), step_(step) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::optional<std::string>& field() const noexcept { return field_; }
    const std::optional<std::size_t>& step() const noexcept { return step_; }

private:
    ErrorKind kind_;
    std::optional<std::string> field_;
    std::optional<std::size_t> step_;
};

inline Error domain_error(const std::string& msg) { return {ErrorKind::Domain, msg}; }
inline Error config_error(const std::string& msg, std::optional<std::string> field = std::nullopt) {
    return {ErrorKind::Config, msg, std::move(field)};
}
inline Error input_error(const std::string& msg) { return {ErrorKind::Input, msg}; }
inline Error usage_error(const std::string& msg) { return {ErrorKind::Usage, msg}; }

}  // namespace gnsfde
