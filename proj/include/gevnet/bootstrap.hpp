#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gevnet/confidence.hpp"
#include "gevnet/gev.hpp"
#include "gevnet/network.hpp"

namespace gevnet {

struct BootstrapResult {
  std::array<ConfidenceInterval, 3> intervals;       // mu, sigma, xi
  std::vector<std::array<double, 3>> replicates;     // B x 3
  std::size_t redraws = 0;
};

// Parametric bootstrap around a fitted parameter triple: simulate B samples
// of size n from theta_hat, re-estimate each with the network, and take
// per-parameter type-7 percentile intervals of the replicates. Degenerate
// draws are replaced from fresh streams (counted).
BootstrapResult parametric_bootstrap(const NetworkModel& model, const GevParams& theta_hat,
                                     std::size_t n, std::size_t B, double level,
                                     std::uint64_t seed, int threads = 1);

// (upper-lower)_bootstrap / (upper-lower)_likelihood; requires both widths
// positive.
double ci_width_ratio(const ConfidenceInterval& bootstrap_ci,
                      const ConfidenceInterval& likelihood_ci);

}  // namespace gevnet
