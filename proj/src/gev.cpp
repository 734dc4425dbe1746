#include "gevnet/gev.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gevnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}

}  // namespace

GevParams::GevParams(double mu_, double sigma_, double xi_)
    : mu(mu_), sigma(sigma_), xi(xi_) {
  require_finite(mu, "mu");
  require_finite(sigma, "sigma");
  require_finite(xi, "xi");
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be > 0");
  if (xi <= -kXiEstimationBound || xi >= kXiEstimationBound) {
    throw std::invalid_argument(
        "xi outside the estimation band (-0.5, 0.5); use GevParams::unchecked "
        "for plain distribution evaluation");
  }
}

GevParams GevParams::unchecked(double mu_, double sigma_, double xi_) {
  require_finite(mu_, "mu");
  require_finite(sigma_, "sigma");
  require_finite(xi_, "xi");
  if (sigma_ <= 0.0) throw std::invalid_argument("sigma must be > 0");
  GevParams p;
  p.mu = mu_;
  p.sigma = sigma_;
  p.xi = xi_;
  return p;
}

GevSample::GevSample(std::vector<double> v) : values(std::move(v)) {
  if (values.empty()) throw std::invalid_argument("sample must be nonempty");
  for (double x : values) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("sample values must be finite");
    }
  }
}

bool support_contains(const GevParams& p, double x) {
  if (p.xi == 0.0) return true;
  return p.sigma + p.xi * (x - p.mu) > 0.0;
}

double cdf(const GevParams& p, double x) {
  const double z = (x - p.mu) / p.sigma;
  if (std::abs(p.xi) < kXiGumbelEps) {
    return std::exp(-std::exp(-z));
  }
  const double arg = 1.0 + p.xi * z;
  if (arg <= 0.0) {
    return p.xi > 0.0 ? 0.0 : 1.0;
  }
  const double t = std::exp(-std::log(arg) / p.xi);
  return std::exp(-t);
}

double pdf(const GevParams& p, double x) {
  const double z = (x - p.mu) / p.sigma;
  if (std::abs(p.xi) < kXiGumbelEps) {
    return std::exp(-z - std::exp(-z)) / p.sigma;
  }
  const double arg = 1.0 + p.xi * z;
  if (arg <= 0.0) return 0.0;
  const double log_t = -std::log(arg) / p.xi;
  const double t = std::exp(log_t);
  // f = (1/sigma) t^(xi+1) exp(-t), evaluated in log space so the tails
  // underflow to 0 instead of producing inf * 0.
  return std::exp((p.xi + 1.0) * log_t - t) / p.sigma;
}

double standard_quantile(double p, double xi) {
  const double log_neg_log_p = std::log(-std::log(p));
  if (std::abs(xi) < kXiGumbelEps) {
    return -log_neg_log_p;
  }
  // ((-log p)^(-xi) - 1)/xi via expm1, which stays accurate and continuous as
  // xi approaches the Gumbel limit.
  return std::expm1(-xi * log_neg_log_p) / xi;
}

double quantile(const GevParams& params, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("quantile: p must lie in (0,1)");
  }
  return params.mu + params.sigma * standard_quantile(p, params.xi);
}

double return_level(const GevParams& params, double T) {
  if (!(T > 1.0)) throw std::domain_error("return_level: T must be > 1");
  return quantile(params, 1.0 - 1.0 / T);
}

GevSample sample(const GevParams& params, std::size_t n, SplitMix64& rng) {
  if (n == 0) throw std::domain_error("sample: n must be >= 1");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = params.mu + params.sigma * standard_quantile(rng.next_open01(), params.xi);
  }
  return GevSample(std::move(out));
}

GevSample sample(const GevParams& params, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return sample(params, n, rng);
}

double neg_log_likelihood(const GevParams& params, const GevSample& sample) {
  const double log_sigma = std::log(params.sigma);
  double nll = 0.0;
  if (std::abs(params.xi) < kXiGumbelEps) {
    for (double x : sample.values) {
      const double z = (x - params.mu) / params.sigma;
      nll += log_sigma + z + std::exp(-z);
    }
    return nll;
  }
  for (double x : sample.values) {
    const double arg = 1.0 + params.xi * (x - params.mu) / params.sigma;
    if (arg <= 0.0) return kInf;
    const double log_t = -std::log(arg) / params.xi;
    nll += log_sigma - (params.xi + 1.0) * log_t + std::exp(log_t);
  }
  return nll;
}

}  // namespace gevnet
