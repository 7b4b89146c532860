#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace faraday {

/// Argument outside the domain of a model formula (zero detuning, negative
/// power, band above Nyquist, ...).
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// A Scenario (or config) that violates one or more invariants. Every
/// violated invariant is listed, not just the first.
class ValidationError : public std::invalid_argument
{
public:
  explicit ValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
  std::vector<std::string> violations_;
};

/// Malformed input data (trace files, non-finite samples).
class DataError : public std::runtime_error
{
public:
  explicit DataError(const std::string& what, long line = 0);

  /// 1-based line number in the offending file, 0 when not file-related.
  long line() const noexcept { return line_; }

private:
  long line_;
};

/// Unparseable or inconsistent configuration.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline std::string join_violations(const std::vector<std::string>& v)
{
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

inline ValidationError::ValidationError(std::vector<std::string> violations)
  : std::invalid_argument("invalid scenario: " + join_violations(violations))
  , violations_(std::move(violations))
{
}

inline DataError::DataError(const std::string& what, long line)
  : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what)
  , line_(line)
{
}

} // namespace faraday
