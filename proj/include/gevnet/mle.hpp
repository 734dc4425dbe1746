#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>

#include "gevnet/confidence.hpp"
#include "gevnet/gev.hpp"

namespace gevnet {

using Vec3 = std::array<double, 3>;

// Standard Nelder-Mead coefficients. Convergence follows the reference
// baseline's rule: the simplex is converged when the function-value spread
// satisfies f_worst - f_best <= tolerance * (|f_best| + tolerance).
struct SimplexOptions {
  int max_iters = 5000;
  double tolerance = 1e-8;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double initial_step = 0.1;  // relative coordinate displacement of the start simplex
};

struct SimplexResult {
  Vec3 x;
  double value;
  bool converged;
  int iterations;
};

// Derivative-free simplex minimization of f over R^3. f may return +infinity
// to mark infeasible points; non-convergence is flagged, never thrown.
SimplexResult nelder_mead(const std::function<double(const Vec3&)>& f, const Vec3& x0,
                          const SimplexOptions& opts = {});

struct MleFit {
  GevParams params;
  double nll;
  bool converged;
  int iterations;
  std::optional<Vec3> std_errors;  // filled by mle_confidence_intervals
};

struct MleOptions {
  SimplexOptions simplex;
  int restarts = 0;  // additional jittered starts, best result kept
  std::uint64_t restart_seed = 1;
};

// Maximum-likelihood fit via Nelder-Mead on the negative log-likelihood.
// Start point uses Gumbel moment matching: sigma0 = sd * sqrt(6)/pi,
// mu0 = mean - 0.5772157 * sigma0, xi0 = 0.1.
MleFit fit_mle(const GevSample& sample, const MleOptions& opts = {});

// Wald intervals theta_i +/- z * SE_i with standard errors from the inverse
// of the central finite-difference Hessian of the nll at the fit (step
// h_i = 1e-4 * (1 + |theta_i|)). Throws CiUnavailableError when the Hessian
// is not positive definite. Also records the SEs into `fit`.
std::array<ConfidenceInterval, 3> mle_confidence_intervals(MleFit& fit,
                                                           const GevSample& sample,
                                                           double level);

// Finite-difference Hessian of the nll, row-major 3x3. Exposed for tests.
std::array<double, 9> nll_hessian(const Vec3& theta, const GevSample& sample);

// Inverse standard normal CDF (Acklam's rational approximation polished by
// one Halley step on erfc); |error| well below 1e-12 over (0,1).
double normal_quantile(double p);

}  // namespace gevnet
