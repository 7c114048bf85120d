#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace superosc {

/// Argument outside the mathematical domain of an operation (y <= 0 for a
/// fractional power, excluded exponent n, non-positive metric factor, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A hypergeometric argument left the real principal branch, or a first
/// integral hit its degenerate level set.
class BranchError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Finite-difference or evaluation produced a non-finite number.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}

  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace superosc
