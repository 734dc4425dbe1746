#include "gevnet/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gevnet/rng.hpp"

namespace gevnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEulerGamma = 0.5772156649015329;

Vec3 axpy(const Vec3& base, double scale, const Vec3& dir) {
  return {base[0] + scale * dir[0], base[1] + scale * dir[1], base[2] + scale * dir[2]};
}

Vec3 sub(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const Vec3&)>& f, const Vec3& x0,
                          const SimplexOptions& opts) {
  constexpr int kDim = 3;
  constexpr int kVerts = kDim + 1;

  std::array<Vec3, kVerts> v;
  std::array<double, kVerts> fv;
  v[0] = x0;
  for (int i = 0; i < kDim; ++i) {
    v[i + 1] = x0;
    const double step = x0[i] != 0.0 ? opts.initial_step * std::fabs(x0[i]) : opts.initial_step;
    v[i + 1][i] += step;
  }
  for (int i = 0; i < kVerts; ++i) fv[i] = f(v[i]);

  auto order = [&] {
    std::array<int, kVerts> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    std::array<Vec3, kVerts> v2;
    std::array<double, kVerts> f2;
    for (int k = 0; k < kVerts; ++k) {
      v2[k] = v[idx[k]];
      f2[k] = fv[idx[k]];
    }
    v = v2;
    fv = f2;
  };

  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    order();
    const double spread = fv[kVerts - 1] - fv[0];
    if (spread <= opts.tolerance * (std::fabs(fv[0]) + opts.tolerance)) {
      converged = true;
      break;
    }

    Vec3 centroid{0, 0, 0};
    for (int i = 0; i < kVerts - 1; ++i) {
      for (int d = 0; d < kDim; ++d) centroid[d] += v[i][d];
    }
    for (int d = 0; d < kDim; ++d) centroid[d] /= (kVerts - 1);

    const Vec3 toward_worst = sub(v[kVerts - 1], centroid);
    const Vec3 xr = axpy(centroid, -opts.reflection, toward_worst);
    const double fr = f(xr);

    if (fr < fv[0]) {
      const Vec3 xe = axpy(centroid, -opts.reflection * opts.expansion, toward_worst);
      const double fe = f(xe);
      if (fe < fr) {
        v[kVerts - 1] = xe;
        fv[kVerts - 1] = fe;
      } else {
        v[kVerts - 1] = xr;
        fv[kVerts - 1] = fr;
      }
    } else if (fr < fv[kVerts - 2]) {
      v[kVerts - 1] = xr;
      fv[kVerts - 1] = fr;
    } else {
      bool shrink = true;
      if (fr < fv[kVerts - 1]) {  // outside contraction
        const Vec3 xc = axpy(centroid, -opts.reflection * opts.contraction, toward_worst);
        const double fc = f(xc);
        if (fc <= fr) {
          v[kVerts - 1] = xc;
          fv[kVerts - 1] = fc;
          shrink = false;
        }
      } else {  // inside contraction
        const Vec3 xc = axpy(centroid, opts.contraction, toward_worst);
        const double fc = f(xc);
        if (fc < fv[kVerts - 1]) {
          v[kVerts - 1] = xc;
          fv[kVerts - 1] = fc;
          shrink = false;
        }
      }
      if (shrink) {
        for (int i = 1; i < kVerts; ++i) {
          v[i] = axpy(v[0], opts.shrink, sub(v[i], v[0]));
          fv[i] = f(v[i]);
        }
      }
    }
  }
  order();
  return {v[0], fv[0], converged, iter};
}

namespace {

double nll_at(const Vec3& theta, const GevSample& sample) {
  if (theta[1] <= 0.0 || !std::isfinite(theta[0]) || !std::isfinite(theta[2])) {
    return kInf;
  }
  return neg_log_likelihood(GevParams::unchecked(theta[0], theta[1], theta[2]), sample);
}

}  // namespace

MleFit fit_mle(const GevSample& sample, const MleOptions& opts) {
  const std::size_t n = sample.n();
  if (n < 2) throw std::invalid_argument("fit_mle requires n >= 2");

  const double mean =
      std::accumulate(sample.values.begin(), sample.values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : sample.values) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd <= 0.0) throw DegenerateSampleError("fit_mle: constant sample");

  const double sigma0 = sd * std::sqrt(6.0) / M_PI;
  const Vec3 x0{mean - kEulerGamma * sigma0, sigma0, 0.1};

  auto objective = [&](const Vec3& th) { return nll_at(th, sample); };

  SimplexResult best = nelder_mead(objective, x0, opts.simplex);
  SplitMix64 rng(opts.restart_seed);
  for (int r = 0; r < opts.restarts; ++r) {
    const Vec3 jittered{x0[0] + sigma0 * rng.next_uniform(-0.5, 0.5),
                        sigma0 * std::exp(rng.next_uniform(-0.7, 0.7)),
                        rng.next_uniform(-0.3, 0.3)};
    const SimplexResult alt = nelder_mead(objective, jittered, opts.simplex);
    if (alt.value < best.value) best = alt;
  }

  return MleFit{GevParams::unchecked(best.x[0], best.x[1], best.x[2]), best.value,
                best.converged, best.iterations, std::nullopt};
}

std::array<double, 9> nll_hessian(const Vec3& theta, const GevSample& sample) {
  Vec3 h;
  for (int i = 0; i < 3; ++i) h[i] = 1e-4 * (1.0 + std::fabs(theta[i]));

  auto at = [&](double d0, double d1, double d2) {
    return nll_at({theta[0] + d0, theta[1] + d1, theta[2] + d2}, sample);
  };

  std::array<double, 9> H{};
  const double f0 = at(0, 0, 0);
  for (int i = 0; i < 3; ++i) {
    Vec3 e{0, 0, 0};
    e[i] = h[i];
    H[i * 3 + i] = (at(e[0], e[1], e[2]) - 2.0 * f0 + at(-e[0], -e[1], -e[2])) / (h[i] * h[i]);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      Vec3 ei{0, 0, 0}, ej{0, 0, 0};
      ei[i] = h[i];
      ej[j] = h[j];
      const double fpp = at(ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2]);
      const double fpm = at(ei[0] - ej[0], ei[1] - ej[1], ei[2] - ej[2]);
      const double fmp = at(-ei[0] + ej[0], -ei[1] + ej[1], -ei[2] + ej[2]);
      const double fmm = at(-ei[0] - ej[0], -ei[1] - ej[1], -ei[2] - ej[2]);
      const double val = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
      H[i * 3 + j] = val;
      H[j * 3 + i] = val;
    }
  }
  return H;
}

std::array<ConfidenceInterval, 3> mle_confidence_intervals(MleFit& fit,
                                                           const GevSample& sample,
                                                           double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("confidence level must lie in (0,1)");
  }
  const Vec3 theta{fit.params.mu, fit.params.sigma, fit.params.xi};
  const auto H = nll_hessian(theta, sample);
  for (double v : H) {
    if (!std::isfinite(v)) {
      throw CiUnavailableError("Hessian stencil hit the support boundary");
    }
  }

  // Positive definiteness via leading principal minors.
  const double m1 = H[0];
  const double m2 = H[0] * H[4] - H[1] * H[3];
  const double det = H[0] * (H[4] * H[8] - H[5] * H[7]) -
                     H[1] * (H[3] * H[8] - H[5] * H[6]) +
                     H[2] * (H[3] * H[7] - H[4] * H[6]);
  if (!(m1 > 0.0 && m2 > 0.0 && det > 0.0)) {
    throw CiUnavailableError("observed information is not positive definite");
  }

  // Diagonal of the inverse from cofactors.
  const Vec3 inv_diag{(H[4] * H[8] - H[5] * H[7]) / det,
                      (H[0] * H[8] - H[2] * H[6]) / det,
                      (H[0] * H[4] - H[1] * H[3]) / det};

  const double z = normal_quantile(0.5 + level / 2.0);
  std::array<ConfidenceInterval, 3> out;
  Vec3 se;
  for (int i = 0; i < 3; ++i) {
    if (!(inv_diag[i] > 0.0)) {
      throw CiUnavailableError("negative variance from inverse information");
    }
    se[i] = std::sqrt(inv_diag[i]);
    out[i] = ConfidenceInterval{theta[i] - z * se[i], theta[i] + z * se[i], level,
                                CiMethod::likelihood, 0};
  }
  fit.std_errors = se;
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0,1)");
  }
  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the exact CDF.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace gevnet
