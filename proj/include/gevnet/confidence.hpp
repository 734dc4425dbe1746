#pragma once

#include <cstddef>
#include <stdexcept>

namespace gevnet {

enum class CiMethod { bootstrap_nn, likelihood };

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;          // in (0,1)
  CiMethod method = CiMethod::likelihood;
  std::size_t replicates = 0;  // bootstrap only

  double width() const { return upper - lower; }
};

// Thrown when a likelihood interval cannot be formed (non-positive-definite
// Hessian, support boundary too close for the finite-difference stencil).
class CiUnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gevnet
