#pragma once

#include <stdexcept>
#include <string>

namespace rwre {

/// A law whose parameters violate its definition (weights, probability ranges).
class InvalidLaw : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation called outside its domain (wrong model kind, bad window,
/// parameters out of range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A run stopped because a configured budget was exhausted.
class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rwre
