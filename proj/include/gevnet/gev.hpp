#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gevnet/rng.hpp"

namespace gevnet {

// Shape band inside which estimation is performed. Maximum likelihood theory
// for the GEV requires xi > -1/2; the trained network is also restricted to
// this band by its output activation.
inline constexpr double kXiEstimationBound = 0.5;

// Below this magnitude the xi branches of cdf/pdf/quantile are numerically
// indistinguishable from the Gumbel limit, so the Gumbel formulas are used.
inline constexpr double kXiGumbelEps = 1e-12;

// GEV parameter triple (location mu, scale sigma > 0, shape xi).
//
// The regular constructor enforces the estimation band |xi| < 1/2 on top of
// sigma > 0. Distribution evaluation outside that band is legitimate, so
// `unchecked` admits any finite xi (sigma > 0 always holds).
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;

  GevParams() = default;  // standard Gumbel (0, 1, 0)
  GevParams(double mu_, double sigma_, double xi_);
  static GevParams unchecked(double mu_, double sigma_, double xi_);

  friend bool operator==(const GevParams&, const GevParams&) = default;
};

// A sample to be fitted: nonempty, all values finite. Order is whatever the
// producer emitted; nothing here assumes sortedness.
struct GevSample {
  std::vector<double> values;

  explicit GevSample(std::vector<double> v);
  std::size_t n() const { return values.size(); }
};

// Thrown by summarization/fitting when the sample carries no scale
// information (IQR == 0).
class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Support set S = { x : sigma + xi*(x - mu) > 0 }; all of R when xi == 0.
bool support_contains(const GevParams& p, double x);

// Two-branch CDF. Outside the support the defining limit is returned (0 below
// a Frechet lower endpoint, 1 above a Weibull upper endpoint) so that
// objectives built on it stay well defined everywhere.
double cdf(const GevParams& p, double x);

// Density; 0 outside the support.
double pdf(const GevParams& p, double x);

// Quantile of the standard GEV(0, 1, xi); exposed because quantile() is
// defined as mu + sigma * this, which makes location-scale equivariance exact
// in floating point as well.
double standard_quantile(double p, double xi);

// Inverse CDF, p in (0,1). Throws std::domain_error otherwise.
double quantile(const GevParams& params, double p);

// T-return level, the (1 - 1/T) quantile. Requires T > 1.
double return_level(const GevParams& params, double T);

// n inverse-transform draws. Consumes exactly n uniforms from the stream.
GevSample sample(const GevParams& params, std::size_t n, SplitMix64& rng);
GevSample sample(const GevParams& params, std::size_t n, std::uint64_t seed);

// -sum log pdf; +infinity if any observation falls outside the support, which
// signals infeasibility to the optimizer without special-casing.
double neg_log_likelihood(const GevParams& params, const GevSample& sample);

}  // namespace gevnet
