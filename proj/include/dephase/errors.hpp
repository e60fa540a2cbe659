#pragma once

#include <stdexcept>
#include <string>

namespace dephase {

// Invalid arguments are reported with std::invalid_argument. The types below
// cover failures of the numerics themselves.

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An information quantity that is infinite for the given input, e.g. the
// diffusion QFI of an undephased (pure) state.
class DivergentInformation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A density matrix that has to be inverted or logged but is rank deficient.
class SingularDensity : public NumericalError {
 public:
  SingularDensity(const std::string& what, int rank, int dim)
      : NumericalError(what), rank_(rank), dim_(dim) {}
  int rank() const { return rank_; }
  int dim() const { return dim_; }

 private:
  int rank_;
  int dim_;
};

}  // namespace dephase
