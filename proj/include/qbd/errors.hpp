#pragma once

#include <stdexcept>
#include <string>

namespace qbd {

/// Parameter outside the family's domain (e.g. alpha <= -1, tau outside bounds).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller misuse: wrong axis, incompatible kind, truncation too deep.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: eigensolver non-convergence, rank deficiency.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A transition row that is not a probability (or rate) distribution.
class ModelIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qbd
