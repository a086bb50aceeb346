#pragma once

#include <stdexcept>
#include <string>

namespace weakres {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. Carries a 1-based line/column.
class ParseError : public Error {
  public:
    ParseError(const std::string& message, int line, int column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), message_(message) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

  private:
    int line_;
    int column_;
    std::string message_;
};

/// Well-formed input that violates a semantic constraint (unknown variable,
/// out-of-bounds value, dimension mismatch, ...).
class InvalidInput : public Error {
  public:
    using Error::Error;
};

/// A formula needs more samples than the signal provides.
class HorizonError : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

/// Solver breakdown (singular basis, iteration cap). Never means UNSAT.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Search limits were hit before any feasible point was found.
class LimitError : public Error {
  public:
    using Error::Error;
};

} // namespace weakres
