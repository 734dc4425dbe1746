#include "gevnet/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "gevnet/bootstrap.hpp"
#include "gevnet/mle.hpp"
#include "gevnet/parallel.hpp"
#include "gevnet/rng.hpp"

namespace gevnet {

std::vector<double> GridSpec::interior_axis(double lo, double hi, int count) {
  if (count < 1 || !(hi > lo)) throw std::invalid_argument("bad axis request");
  const double step = (hi - lo) / count;
  std::vector<double> axis(count);
  for (int i = 0; i < count; ++i) axis[i] = lo + step / 2.0 + i * step;
  return axis;
}

GridSpec GridSpec::standard() {
  GridSpec g;
  g.sigma_axis = interior_axis(0.1, 40.0, 20);
  g.xi_axis = interior_axis(-0.4, 0.4, 20);
  return g;
}

namespace {

// Simulate a nondegenerate sample from the truth and fit it with both
// estimators. Degenerate draws are replaced from the next attempt stream.
CaseResult run_case(const NetworkModel& model, const GevParams& truth,
                    std::size_t sample_size, std::uint64_t case_seed,
                    std::size_t* redraws) {
  CaseResult r;
  r.mu_true = truth.mu;
  r.sigma_true = truth.sigma;
  r.xi_true = truth.xi;
  r.sample_size = sample_size;
  for (std::uint32_t attempt = 0;; ++attempt) {
    const GevSample y = sample(truth, sample_size, SplitMix64::derive(case_seed, attempt));
    try {
      const GevParams nn = estimate(model, y);
      r.nn_mu = nn.mu;
      r.nn_sigma = nn.sigma;
      r.nn_xi = nn.xi;
      const MleFit fit = fit_mle(y);
      r.mle_converged = fit.converged;
      r.mle_mu = fit.params.mu;
      r.mle_sigma = fit.params.sigma;
      r.mle_xi = fit.params.xi;
      if (redraws) *redraws += attempt;
      return r;
    } catch (const DegenerateSampleError&) {
    }
  }
}

}  // namespace

DeviationStudy deviation_study(const NetworkModel& model, std::size_t n_test,
                               std::uint64_t seed, const ParameterRanges& ranges,
                               std::size_t sample_size, int threads) {
  DeviationStudy out;
  if (n_test == 0) return out;
  const std::vector<GevParams> truths =
      sample_parameter_configs(n_test, ranges, SplitMix64::derive(seed, 1));
  out.cases.resize(n_test);
  std::vector<std::size_t> redraws(n_test, 0);
  const std::uint64_t case_seed = SplitMix64::derive(seed, 2);
  parallel_for(n_test, threads, [&](std::size_t i) {
    out.cases[i] = run_case(model, truths[i], sample_size, SplitMix64::derive(case_seed, i),
                            &redraws[i]);
    out.cases[i].case_id = i;
  });
  for (const auto& c : out.cases) out.mle_exclusions += c.mle_converged ? 0 : 1;
  for (auto rc : redraws) out.redraws += rc;
  return out;
}

MseGridResult mse_grid(const NetworkModel& model, const GridSpec& grid, std::uint64_t seed,
                       int threads) {
  if (grid.replications < 1) throw std::invalid_argument("mse_grid: replications >= 1");
  MseGridResult out;
  const std::size_t n_cells = grid.sigma_axis.size() * grid.xi_axis.size();
  const std::size_t reps = static_cast<std::size_t>(grid.replications);
  const std::size_t per_size = n_cells * reps;
  const std::size_t total = per_size * grid.sizes.size();
  out.cases.resize(total);

  const std::uint64_t case_seed = SplitMix64::derive(seed, 3);
  parallel_for(total, threads, [&](std::size_t t) {
    const std::size_t size_idx = t / per_size;
    const std::size_t within = t % per_size;
    const std::size_t cell = within / reps;
    const std::size_t si = cell / grid.xi_axis.size();
    const std::size_t xj = cell % grid.xi_axis.size();
    const GevParams truth(grid.mu, grid.sigma_axis[si], grid.xi_axis[xj]);
    out.cases[t] = run_case(model, truth, grid.sizes[size_idx],
                            SplitMix64::derive(case_seed, t), nullptr);
    out.cases[t].case_id = t;
  });

  for (std::size_t size_idx = 0; size_idx < grid.sizes.size(); ++size_idx) {
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      MseCell c;
      c.sigma = grid.sigma_axis[cell / grid.xi_axis.size()];
      c.xi = grid.xi_axis[cell % grid.xi_axis.size()];
      c.size = grid.sizes[size_idx];
      c.replications = grid.replications;
      for (std::size_t r = 0; r < reps; ++r) {
        const CaseResult& cr = out.cases[size_idx * per_size + cell * reps + r];
        const double nds = cr.nn_sigma - cr.sigma_true;
        const double ndx = cr.nn_xi - cr.xi_true;
        c.nn_mse_sigma += nds * nds;
        c.nn_mse_xi += ndx * ndx;
        if (cr.mle_converged) {
          const double mds = cr.mle_sigma - cr.sigma_true;
          const double mdx = cr.mle_xi - cr.xi_true;
          c.mle_mse_sigma += mds * mds;
          c.mle_mse_xi += mdx * mdx;
          ++c.mle_included;
        }
      }
      c.nn_mse_sigma /= static_cast<double>(reps);
      c.nn_mse_xi /= static_cast<double>(reps);
      if (c.mle_included > 0) {
        c.mle_mse_sigma /= c.mle_included;
        c.mle_mse_xi /= c.mle_included;
      }
      out.cells.push_back(c);
    }
  }
  return out;
}

WidthRatioStudy width_ratio_study(const NetworkModel& model, std::size_t n_cases,
                                  std::size_t sample_size, std::size_t B, double level,
                                  std::uint64_t seed, const ParameterRanges& ranges,
                                  int threads) {
  WidthRatioStudy out;
  if (n_cases == 0) return out;
  const std::vector<GevParams> truths =
      sample_parameter_configs(n_cases, ranges, SplitMix64::derive(seed, 4));
  out.cases.resize(n_cases);
  const std::uint64_t case_seed = SplitMix64::derive(seed, 5);

  parallel_for(n_cases, threads, [&](std::size_t i) {
    WidthRatioCase& c = out.cases[i];
    c.case_id = i;
    const GevParams& truth = truths[i];
    c.mu_true = truth.mu;
    c.sigma_true = truth.sigma;
    c.xi_true = truth.xi;
    const std::uint64_t s = SplitMix64::derive(case_seed, i);
    for (std::uint32_t attempt = 0;; ++attempt) {
      const GevSample y = sample(truth, sample_size, SplitMix64::derive(s, attempt));
      try {
        const GevParams nn_hat = estimate(model, y);
        const BootstrapResult boot = parametric_bootstrap(
            model, nn_hat, sample_size, B, level, SplitMix64::derive(s, 1000 + attempt), 1);
        MleFit fit = fit_mle(y);
        if (!fit.converged) return;  // counted below via c.ok == false
        const auto mle_ci = mle_confidence_intervals(fit, y, level);
        c.ratio_mu = ci_width_ratio(boot.intervals[0], mle_ci[0]);
        c.ratio_sigma = ci_width_ratio(boot.intervals[1], mle_ci[1]);
        c.ratio_xi = ci_width_ratio(boot.intervals[2], mle_ci[2]);
        c.boot_covers_mu =
            truth.mu >= boot.intervals[0].lower && truth.mu <= boot.intervals[0].upper;
        c.boot_covers_sigma =
            truth.sigma >= boot.intervals[1].lower && truth.sigma <= boot.intervals[1].upper;
        c.boot_covers_xi =
            truth.xi >= boot.intervals[2].lower && truth.xi <= boot.intervals[2].upper;
        c.ok = true;
        return;
      } catch (const DegenerateSampleError&) {
        // resample and retry
      } catch (const CiUnavailableError&) {
        return;
      }
    }
  });
  for (const auto& c : out.cases) out.failures += c.ok ? 0 : 1;
  return out;
}

TimingReport timing_benchmark(const NetworkModel& model, std::size_t n_test,
                              std::uint64_t seed, std::size_t sample_size,
                              const ParameterRanges& ranges) {
  if (n_test == 0) throw std::invalid_argument("timing_benchmark: n_test >= 1");
  const std::vector<GevParams> truths =
      sample_parameter_configs(n_test, ranges, SplitMix64::derive(seed, 6));

  // Pre-generate every sample so only estimation is timed, on identical data.
  std::vector<GevSample> samples;
  samples.reserve(n_test);
  const std::uint64_t case_seed = SplitMix64::derive(seed, 7);
  for (std::size_t i = 0; i < n_test; ++i) {
    for (std::uint32_t attempt = 0;; ++attempt) {
      GevSample y = sample(truths[i], sample_size,
                           SplitMix64::derive(SplitMix64::derive(case_seed, i), attempt));
      try {
        (void)summarize(y, model.pset);
        samples.push_back(std::move(y));
        break;
      } catch (const DegenerateSampleError&) {
      }
    }
  }

  TimingReport report;
  report.n_cases = n_test;
  report.sample_size = sample_size;
  report.training_seconds = model.metadata.training_seconds;

  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;  // keep the loops from being optimized out

  const auto t0 = clock::now();
  for (const GevSample& y : samples) sink = sink + estimate(model, y).xi;
  const auto t1 = clock::now();
  for (const GevSample& y : samples) {
    const MleFit fit = fit_mle(y);
    report.mle_nonconverged += fit.converged ? 0 : 1;
    sink = sink + fit.params.xi;
  }
  const auto t2 = clock::now();

  report.nn_seconds = std::chrono::duration<double>(t1 - t0).count();
  report.mle_seconds = std::chrono::duration<double>(t2 - t1).count();
  report.speedup = report.mle_seconds / report.nn_seconds;
  return report;
}

// ---------------------------------------------------------------------------
// Table writers
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_table(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_fig2_table(const DeviationStudy& study, const std::string& path) {
  std::ofstream out = open_table(path);
  out << "case_id,estimator,param,true_value,deviation\n";
  for (const auto& c : study.cases) {
    out << c.case_id << ",nn,mu," << c.mu_true << "," << c.nn_mu - c.mu_true << "\n";
    out << c.case_id << ",nn,log_sigma," << c.sigma_true << ","
        << std::log(c.nn_sigma) - std::log(c.sigma_true) << "\n";
    out << c.case_id << ",nn,xi," << c.xi_true << "," << c.nn_xi - c.xi_true << "\n";
    if (c.mle_converged) {
      out << c.case_id << ",mle,mu," << c.mu_true << "," << c.mle_mu - c.mu_true << "\n";
      out << c.case_id << ",mle,log_sigma," << c.sigma_true << ","
          << std::log(c.mle_sigma) - std::log(c.sigma_true) << "\n";
      out << c.case_id << ",mle,xi," << c.xi_true << "," << c.mle_xi - c.xi_true << "\n";
    }
  }
}

void write_fig3_table(const MseGridResult& grid, const std::string& path) {
  std::ofstream out = open_table(path);
  out << "sigma,xi,size,estimator,mse_sigma,mse_xi,replications\n";
  for (const auto& c : grid.cells) {
    out << c.sigma << "," << c.xi << "," << c.size << ",nn," << c.nn_mse_sigma << ","
        << c.nn_mse_xi << "," << c.replications << "\n";
    out << c.sigma << "," << c.xi << "," << c.size << ",mle," << c.mle_mse_sigma << ","
        << c.mle_mse_xi << "," << c.mle_included << "\n";
  }
}

void write_fig4_table(const WidthRatioStudy& study, const std::string& path) {
  std::ofstream out = open_table(path);
  out << "case_id,mu_true,sigma_true,xi_true,ratio_mu,ratio_sigma,ratio_xi\n";
  for (const auto& c : study.cases) {
    if (!c.ok) continue;
    out << c.case_id << "," << c.mu_true << "," << c.sigma_true << "," << c.xi_true << ","
        << c.ratio_mu << "," << c.ratio_sigma << "," << c.ratio_xi << "\n";
  }
}

void write_timing_table(const TimingReport& t, const std::string& path) {
  std::ofstream out = open_table(path);
  out << "estimator,n_cases,sample_size,total_seconds,per_sample_seconds,"
         "speedup_vs_mle,training_seconds\n";
  out << "nn," << t.n_cases << "," << t.sample_size << "," << t.nn_seconds << ","
      << t.nn_per_sample() << "," << t.speedup << "," << t.training_seconds << "\n";
  out << "mle," << t.n_cases << "," << t.sample_size << "," << t.mle_seconds << ","
      << t.mle_per_sample() << ",," << "\n";
}

}  // namespace gevnet
