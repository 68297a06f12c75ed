#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bfm {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Invalid option or configuration value.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative routine hit its budget. Carries the best value it had.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double partial, double lo = 0.0, double hi = 0.0)
      : std::runtime_error(what), partial_(partial), lo_(lo), hi_(hi) {}
  double partial() const { return partial_; }
  double bracket_lo() const { return lo_; }
  double bracket_hi() const { return hi_; }

private:
  double partial_, lo_, hi_;
};

/// Numerically degenerate result, e.g. a singular information matrix.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what, double condition = 0.0)
      : std::runtime_error(what), condition_(condition) {}
  double condition_number() const { return condition_; }

private:
  double condition_;
};

/// Malformed dataset or series file.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + reason),
        line_(line), column_(column), reason_(reason) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& reason() const { return reason_; }

private:
  std::size_t line_, column_;
  std::string reason_;
};

/// Dataset parsed but fails a content check.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace bfm
