#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace incomefit {

/// Root of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error
{
public:
  using Error::Error;
};

/// Result not representable as a finite double.
class OverflowError : public Error
{
public:
  using Error::Error;
};

/// Iterative evaluation that failed to converge within its budget.
class NumericError : public Error
{
public:
  NumericError(const std::string& what, std::size_t iterations)
    : Error(what + " (after " + std::to_string(iterations) + " iterations)")
    , iterations_(iterations)
  {}

  std::size_t iterations() const { return iterations_; }

private:
  std::size_t iterations_;
};

/// Caller violated a documented precondition (arity, counts, normalization).
class PreconditionError : public Error
{
public:
  using Error::Error;
};

/// Malformed tabular or key-value input. `row` is the 1-based source line, 0 if unknown.
class ParseError : public Error
{
public:
  ParseError(const std::string& what, std::size_t row)
    : Error(row > 0 ? "row " + std::to_string(row) + ": " + what : what)
    , row_(row)
  {}

  std::size_t row() const { return row_; }

private:
  std::size_t row_;
};

/// Histograms whose bin edges do not line up.
class AlignmentError : public Error
{
public:
  using Error::Error;
};

/// Data that contradicts itself, e.g. a sub-population exceeding the total in a bin.
class ConsistencyError : public Error
{
public:
  ConsistencyError(const std::string& what, std::size_t bin)
    : Error(what)
    , bin_(bin)
  {}

  std::size_t bin() const { return bin_; }

private:
  std::size_t bin_;
};

/// Every optimizer start produced non-finite residuals.
class FitFailure : public Error
{
public:
  using Error::Error;
};

} // namespace incomefit
