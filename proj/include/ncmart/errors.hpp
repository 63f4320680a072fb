#pragma once

#include <stdexcept>
#include <string>

namespace ncmart {

// Raised when an argument lies outside the mathematical domain of an
// operation (p < 1, non-self-adjoint input to a spectral routine, a
// martingale that is not positive where positivity is required, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when shapes or algebras do not match (an operator of the wrong
// dimension, a filtration level that does not exist, malformed JSON).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ncmart
