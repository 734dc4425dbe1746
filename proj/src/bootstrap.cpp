#include "gevnet/bootstrap.hpp"

#include <algorithm>

#include "gevnet/parallel.hpp"
#include "gevnet/rng.hpp"
#include "gevnet/summaries.hpp"
#include "gevnet/training.hpp"

namespace gevnet {

BootstrapResult parametric_bootstrap(const NetworkModel& model, const GevParams& theta_hat,
                                     std::size_t n, std::size_t B, double level,
                                     std::uint64_t seed, int threads) {
  if (n < kMinEstimationSamples) {
    throw std::domain_error("parametric_bootstrap: n must be >= 30");
  }
  if (B < 2) throw std::domain_error("parametric_bootstrap: B must be >= 2");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("parametric_bootstrap: level must lie in (0,1)");
  }

  BootstrapResult out;
  out.replicates.resize(B);
  std::vector<std::uint32_t> redraw_counts(B, 0);

  parallel_for(B, threads, [&](std::size_t b) {
    const std::uint64_t rep_seed = SplitMix64::derive(seed, b);
    for (std::uint32_t attempt = 0;; ++attempt) {
      try {
        const GevSample boot = sample(theta_hat, n, SplitMix64::derive(rep_seed, attempt));
        const GevParams est = estimate(model, boot);
        out.replicates[b] = {est.mu, est.sigma, est.xi};
        redraw_counts[b] = attempt;
        return;
      } catch (const DegenerateSampleError&) {
      }
    }
  });
  for (auto c : redraw_counts) out.redraws += c;

  const double p_lo = (1.0 - level) / 2.0;
  std::vector<double> column(B);
  for (int j = 0; j < 3; ++j) {
    for (std::size_t b = 0; b < B; ++b) column[b] = out.replicates[b][j];
    std::sort(column.begin(), column.end());
    out.intervals[j] = ConfidenceInterval{percentile_sorted(column, p_lo),
                                          percentile_sorted(column, 1.0 - p_lo), level,
                                          CiMethod::bootstrap_nn, B};
  }
  return out;
}

double ci_width_ratio(const ConfidenceInterval& bootstrap_ci,
                      const ConfidenceInterval& likelihood_ci) {
  const double wb = bootstrap_ci.width();
  const double wl = likelihood_ci.width();
  if (!(wl > 0.0) || !(wb > 0.0)) {
    throw std::domain_error("ci_width_ratio: interval widths must be positive");
  }
  return wb / wl;
}

}  // namespace gevnet
