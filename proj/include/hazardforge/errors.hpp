#pragma once

#include <stdexcept>
#include <string>

namespace hazardforge {

// All library failures derive from Error; the CLI maps the category to an
// exit code (validation-type -> 2, numerical -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

// Input data violates a type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }
  const char* kind() const noexcept override { return "parse"; }

 private:
  std::size_t line_;
};

// Iterative or algebraic failure: divergence, singular systems, degenerate
// statistics.
class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical"; }
};

class RankError : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "rank"; }
};

class MonotoneLikelihoodError : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "monotone-likelihood"; }
};

class DegenerateTestError : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "degenerate-test"; }
};

class QuantileUndefinedError : public DomainError {
 public:
  using DomainError::DomainError;
  const char* kind() const noexcept override { return "quantile-undefined"; }
};

class SingularCellError : public NumericalError {
 public:
  SingularCellError(std::size_t row, std::size_t col, double s, double t)
      : NumericalError("singular Dabrowska cell at (" + std::to_string(s) + ", " +
                       std::to_string(t) + ")"),
        row_(row),
        col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }
  const char* kind() const noexcept override { return "singular-cell"; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class EmptyNeighborhoodError : public DomainError {
 public:
  using DomainError::DomainError;
  const char* kind() const noexcept override { return "empty-neighborhood"; }
};

}  // namespace hazardforge
