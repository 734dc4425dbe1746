#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gevnet/network.hpp"
#include "gevnet/training.hpp"

namespace gevnet {

// Regular interior mesh of the open (sigma, xi) training rectangle, mu fixed;
// axis points sit half a step inside the endpoints.
struct GridSpec {
  std::vector<double> sigma_axis;
  std::vector<double> xi_axis;
  double mu = 0.0;
  int replications = 100;
  std::vector<std::size_t> sizes{72, 416, 1000};

  static std::vector<double> interior_axis(double lo, double hi, int count);
  static GridSpec standard();  // 20 x 20, 100 replications
};

// One simulated test case fitted by both estimators.
struct CaseResult {
  std::uint64_t case_id = 0;
  double mu_true = 0, sigma_true = 0, xi_true = 0;
  std::size_t sample_size = 0;
  double nn_mu = 0, nn_sigma = 0, nn_xi = 0;
  bool mle_converged = false;
  double mle_mu = 0, mle_sigma = 0, mle_xi = 0;
};

struct DeviationStudy {
  std::vector<CaseResult> cases;
  std::size_t mle_exclusions = 0;  // non-converged fits, excluded from stats
  std::size_t redraws = 0;         // degenerate samples replaced
};

// Deviation study: random truths, one sample each, estimates from both
// estimators; sigma deviations are reported on the log scale.
DeviationStudy deviation_study(const NetworkModel& model, std::size_t n_test,
                               std::uint64_t seed, const ParameterRanges& ranges = {},
                               std::size_t sample_size = 1000, int threads = 1);

struct MseCell {
  double sigma = 0, xi = 0;
  std::size_t size = 0;
  int replications = 0;
  double nn_mse_sigma = 0, nn_mse_xi = 0;
  int mle_included = 0;
  double mle_mse_sigma = 0, mle_mse_xi = 0;
};

struct MseGridResult {
  std::vector<MseCell> cells;       // one per (sigma, xi, size)
  std::vector<CaseResult> cases;    // raw per-replication records
};

// MSE map: per-cell MSE of sigma-hat and xi-hat across sample sizes.
MseGridResult mse_grid(const NetworkModel& model, const GridSpec& grid, std::uint64_t seed,
                       int threads = 1);

struct WidthRatioCase {
  std::uint64_t case_id = 0;
  double mu_true = 0, sigma_true = 0, xi_true = 0;
  bool ok = false;  // both interval constructions succeeded
  double ratio_mu = 0, ratio_sigma = 0, ratio_xi = 0;
  bool boot_covers_mu = false, boot_covers_sigma = false, boot_covers_xi = false;
};

struct WidthRatioStudy {
  std::vector<WidthRatioCase> cases;
  std::size_t failures = 0;  // MLE non-convergence or unavailable Hessian CI
};

// Interval-width comparison: bootstrap-NN vs likelihood widths on fresh
// known-truth samples; also records whether the bootstrap interval covers the
// truth (coverage bookkeeping for the acceptance run).
WidthRatioStudy width_ratio_study(const NetworkModel& model, std::size_t n_cases,
                                  std::size_t sample_size, std::size_t B, double level,
                                  std::uint64_t seed, const ParameterRanges& ranges = {},
                                  int threads = 1);

struct TimingReport {
  std::size_t n_cases = 0;
  std::size_t sample_size = 0;
  double nn_seconds = 0, mle_seconds = 0;
  double speedup = 0;  // mle_seconds / nn_seconds
  std::size_t mle_nonconverged = 0;
  double training_seconds = 0;  // from the model metadata, reported separately

  double nn_per_sample() const { return nn_seconds / static_cast<double>(n_cases); }
  double mle_per_sample() const { return mle_seconds / static_cast<double>(n_cases); }
};

// Wall-clock comparison of batch estimation on identical pre-generated
// samples, both estimators single-threaded.
TimingReport timing_benchmark(const NetworkModel& model, std::size_t n_test,
                              std::uint64_t seed, std::size_t sample_size = 1000,
                              const ParameterRanges& ranges = {});

// Plot-ready comma-separated tables.
void write_fig2_table(const DeviationStudy& study, const std::string& path);
void write_fig3_table(const MseGridResult& grid, const std::string& path);
void write_fig4_table(const WidthRatioStudy& study, const std::string& path);
void write_timing_table(const TimingReport& timing, const std::string& path);

}  // namespace gevnet
