#pragma once

#include <stdexcept>
#include <string>

namespace assort {

// Family enumeration would exceed the configured cap.
class EnumerationTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric failure inside the restricted-master simplex (pivot below the
// stability threshold or a stalled basis).
class DegeneratePivot : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Maximum-likelihood estimation requested on a history where some product
// was never offered.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A policy broke its behavioural contract (offered a non-member assortment
// or drove a capacity negative).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Policy construction refused because the confidence constant omega is >= 1.
class PolicyRefused : public std::runtime_error {
 public:
  PolicyRefused(const std::string& what, double omega)
      : std::runtime_error(what), omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

// Invalid or unusable experiment/instance configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace assort
