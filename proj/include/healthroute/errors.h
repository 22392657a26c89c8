#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace healthroute {

/// Invalid configuration (pyramid, prevalence, modifier table, model parameters).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Data that parsed but violates a domain invariant.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. Carries the position when it is known (1-based, 0 = unknown).
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string &message, std::string token, std::size_t line = 0,
               std::size_t column = 0);

    const std::string &token() const noexcept { return token_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::string token_;
    std::size_t line_;
    std::size_t column_;
};

} // namespace healthroute
