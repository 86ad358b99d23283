#pragma once

#include <stdexcept>
#include <string>

namespace gdest {

/// Matrix or vector shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the domain where a formula is meaningful.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A simulation produced a non-finite value. Carries the simulation time.
class NumericOverflow : public std::runtime_error {
 public:
  NumericOverflow(const std::string& what, double t)
      : std::runtime_error(what + " (t=" + std::to_string(t) + ")"), time_(t) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Malformed input text. `line` is 1-based; 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A well-formed value that violates an invariant. Names the offending field.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gdest
