#include "gevnet/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gevnet {

double percentile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::domain_error("percentile of empty sequence");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("percentile: p must lie in [0,1]");
  }
  const std::size_t n = sorted.size();
  const double h = static_cast<double>(n - 1) * p + 1.0;
  const auto k = static_cast<std::size_t>(h);
  if (k >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(k);
  return sorted[k - 1] + frac * (sorted[k] - sorted[k - 1]);
}

double empirical_percentile(const GevSample& sample, double p) {
  std::vector<double> sorted = sample.values;
  std::sort(sorted.begin(), sorted.end());
  return percentile_sorted(sorted, p);
}

namespace {

double sample_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double iqr_of_sorted(const std::vector<double>& sorted) {
  return percentile_sorted(sorted, 0.75) - percentile_sorted(sorted, 0.25);
}

}  // namespace

std::pair<GevSample, StandardizationInfo> standardize(const GevSample& sample) {
  if (sample.n() < 2) {
    throw std::invalid_argument("standardize requires n >= 2");
  }
  std::vector<double> sorted = sample.values;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = iqr_of_sorted(sorted);
  if (iqr <= 0.0) {
    throw DegenerateSampleError("sample IQR is zero; cannot standardize");
  }
  const double mean = sample_mean(sample.values);
  std::vector<double> z(sample.n());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = (sample.values[i] - mean) / iqr;
  }
  return {GevSample(std::move(z)), StandardizationInfo{mean, iqr}};
}

GevParams standardize_params(const GevParams& params, const StandardizationInfo& info) {
  return GevParams::unchecked((params.mu - info.mean) / info.iqr,
                              params.sigma / info.iqr, params.xi);
}

GevParams destandardize_params(const GevParams& params_std, const StandardizationInfo& info) {
  return GevParams::unchecked(params_std.mu * info.iqr + info.mean,
                              params_std.sigma * info.iqr, params_std.xi);
}

QuantileSummary summarize(const GevSample& sample, const PercentileSet& pset) {
  auto [z, info] = standardize(sample);
  std::sort(z.values.begin(), z.values.end());
  QuantileSummary out;
  for (std::size_t i = 0; i < kNumPercentiles; ++i) {
    out.percentiles[i] = percentile_sorted(z.values, pset.probs[i]);
  }
  out.sample_min = z.values.front();
  out.sample_max = z.values.back();
  out.info = info;
  out.n = sample.n();
  return out;
}

}  // namespace gevnet
