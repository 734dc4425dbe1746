#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "gevnet/gev.hpp"

namespace gevnet {

inline constexpr std::size_t kNumPercentiles = 11;

// The network's input probabilities, from the 0.01th to the 99.99th
// percentile. Fixed for a trained model; stored in its file.
struct PercentileSet {
  std::array<double, kNumPercentiles> probs;

  static PercentileSet standard() {
    return {{0.0001, 0.001, 0.01, 0.10, 0.25, 0.50,
             0.75, 0.90, 0.99, 0.999, 0.9999}};
  }
};

// Mean/IQR pair mapping between raw and standardized scales.
struct StandardizationInfo {
  double mean = 0.0;
  double iqr = 1.0;  // > 0
};

// Standardized percentile vector plus the standardized sample extremes needed
// by the support-constraint penalty.
struct QuantileSummary {
  std::array<double, kNumPercentiles> percentiles;
  double sample_min = 0.0;
  double sample_max = 0.0;
  StandardizationInfo info;
  std::size_t n = 0;
};

// Type-7 empirical quantile: linear interpolation between order statistics at
// rank h = (n-1)p + 1. p = 0 gives the minimum, p = 1 the maximum. `sorted`
// must be ascending.
double percentile_sorted(const std::vector<double>& sorted, double p);

// Same, on an unsorted sample (sorts a copy). p in [0,1].
double empirical_percentile(const GevSample& sample, double p);

// z = (y - mean)/IQR with type-7 quartiles. Requires n >= 2; throws
// DegenerateSampleError when the IQR vanishes.
std::pair<GevSample, StandardizationInfo> standardize(const GevSample& sample);

// Parameter maps between scales: mu' = (mu - mean)/IQR, sigma' = sigma/IQR,
// xi unchanged, and the inverse.
GevParams standardize_params(const GevParams& params, const StandardizationInfo& info);
GevParams destandardize_params(const GevParams& params_std, const StandardizationInfo& info);

// Standardize, evaluate the percentile set on the standardized sample, and
// record the standardized extremes. Requires n >= 2.
QuantileSummary summarize(const GevSample& sample,
                          const PercentileSet& pset = PercentileSet::standard());

}  // namespace gevnet
