#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kiefer {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Index, time or length outside what the input supports.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Mismatched vector or matrix shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem instance larger than a configured cap.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Ridge-repaired Cholesky could not succeed within the jitter budget.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, double last_jitter)
      : std::runtime_error(what), last_jitter_(last_jitter) {}
  double last_jitter() const noexcept { return last_jitter_; }

 private:
  double last_jitter_;
};

/// Too few observations for a statistical estimate; carries the counts.
class EstimationError : public std::runtime_error {
 public:
  EstimationError(const std::string& what, std::size_t pairs, std::size_t bins)
      : std::runtime_error(what), pairs_(pairs), bins_(bins) {}
  std::size_t pairs() const noexcept { return pairs_; }
  std::size_t bins() const noexcept { return bins_; }

 private:
  std::size_t pairs_;
  std::size_t bins_;
};

}  // namespace kiefer
