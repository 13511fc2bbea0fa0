#pragma once

#include <stdexcept>
#include <string>

namespace nfet {

// Input outside an operation's mathematical domain (zero reference distance,
// non-positive semi-axis, point on top of an array element, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The Fisher information matrix cannot be inverted reliably.
class SingularFimError : public std::runtime_error {
 public:
  SingularFimError(const std::string& what, double min_eigenvalue, double condition)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue), condition_(condition) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  double condition() const noexcept { return condition_; }

 private:
  double min_eigenvalue_;
  double condition_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nfet
