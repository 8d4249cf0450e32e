#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pxem {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller violated a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linear system could not be solved reliably.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, std::size_t pivot)
      : std::runtime_error(what), pivot_(pivot) {}

  /// Coordinate of the weakest pivot in the original ordering.
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Complete-data fit left the open parameter space (e.g. separation).
class DegenerateFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A single data row could not be processed.
class RowError : public std::runtime_error {
 public:
  RowError(const std::string& what, std::size_t row)
      : std::runtime_error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Malformed or unreadable input file.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Design matrix without full column rank.
class RankDeficientError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace pxem
