#pragma once

#include <stdexcept>
#include <string>

namespace boxguard {

/// Raised for malformed inputs, violated preconditions and bad configuration.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A box or region has no held-out evidence and cannot carry a guarantee.
class NoEvidenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A Monte Carlo region received zero hits.
class NoMassError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &msg, std::size_t line, std::size_t column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                           ": " + msg),
        line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

} // namespace boxguard
