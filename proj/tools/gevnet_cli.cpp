// gevnet command-line tool: simulate GEV samples, build simulated training
// datasets, train the quantile-input estimator, fit per-site batches with the
// network and/or maximum likelihood, and run the benchmark studies.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "gevnet/bootstrap.hpp"
#include "gevnet/evaluation.hpp"
#include "gevnet/mle.hpp"
#include "gevnet/series_io.hpp"
#include "gevnet/training.hpp"

namespace {

using namespace gevnet;

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct SimulateArgs {
  double mu = 0, sigma = 1, xi = 0;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

void run_simulate(const SimulateArgs& a) {
  const GevParams params(a.mu, a.sigma, a.xi);  // validates before any file I/O
  const GevSample s = sample(params, a.n, a.seed);
  write_sample_file(s, params, a.seed, a.out);
  std::cout << "wrote " << a.n << " values to " << a.out << "\n";
}

struct DatasetArgs {
  std::string scenario = "fixed";
  std::size_t n_train = 30000, n_valid = 4000;
  std::size_t size = 1000;
  std::vector<std::size_t> sizes{30, 72, 182, 416, 1000};
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string valid_out;
};

DatasetSpec to_spec(const DatasetArgs& a) {
  DatasetSpec spec;
  spec.n_train = a.n_train;
  spec.n_valid = a.n_valid;
  spec.scenario = a.scenario == "varying" ? Scenario::varying_size : Scenario::fixed_size;
  spec.fixed_size = a.size;
  spec.sizes = a.sizes;
  spec.seed = a.seed;
  return spec;
}

void run_dataset(const DatasetArgs& a) {
  const BuiltDatasets data = build_dataset(to_spec(a), ParameterRanges{},
                                           resolve_threads(a.threads));
  write_dataset_csv(data.train.records, PercentileSet::standard(), a.out);
  std::cout << "wrote " << data.train.records.size() << " training records to " << a.out
            << " (" << data.train.redraws << " degenerate redraws)\n";
  if (!a.valid_out.empty()) {
    write_dataset_csv(data.valid.records, PercentileSet::standard(), a.valid_out);
    std::cout << "wrote " << data.valid.records.size() << " validation records to "
              << a.valid_out << "\n";
  }
}

struct TrainArgs {
  DatasetArgs data;
  std::vector<std::size_t> hidden{128, 128, 128, 128};
  std::size_t batch_size = 64;
  int max_epochs = 150;
  int patience = 10;
  int lr_patience = 5;
  double lr = 0.001;
  double min_lr = 1e-5;
  double lambda = 1.0;
  std::string penalty = "hinge";
  std::string model_out = "model.json";
  std::string history_out;
  bool quiet = false;
};

void run_train(const TrainArgs& a) {
  const int threads = resolve_threads(a.data.threads);
  std::cerr << "building dataset (" << a.data.n_train << " train / " << a.data.n_valid
            << " valid, scenario " << a.data.scenario << ")...\n";
  const BuiltDatasets data = build_dataset(to_spec(a.data), ParameterRanges{}, threads);
  if (data.train.redraws + data.valid.redraws > 0) {
    std::cerr << "degenerate redraws: " << data.train.redraws + data.valid.redraws << "\n";
  }

  std::vector<std::size_t> dims{11};
  dims.insert(dims.end(), a.hidden.begin(), a.hidden.end());
  dims.push_back(3);

  TrainConfig config;
  config.batch_size = a.batch_size;
  config.max_epochs = a.max_epochs;
  config.early_stop_patience = a.patience;
  config.lr_patience = a.lr_patience;
  config.learning_rate = a.lr;
  config.min_lr = a.min_lr;
  config.lambda = a.lambda;
  config.penalty_mode =
      a.penalty == "indicator" ? PenaltyMode::indicator : PenaltyMode::hinge;
  config.seed = a.data.seed;
  config.log_epochs = !a.quiet;

  TrainResult result = train(NetworkModel::make(dims, a.data.seed), data.train.records,
                             data.valid.records, config);
  result.model.metadata.scenario = a.data.scenario;
  save_model(result.model, a.model_out);
  std::cout << "model written to " << a.model_out << " (best epoch "
            << result.history.best_epoch << ", valid loss "
            << result.history.best_valid_loss << ", "
            << std::fixed << std::setprecision(1)
            << result.model.metadata.training_seconds << " s)\n";
  if (!a.history_out.empty()) {
    write_history_csv(result.history, a.history_out);
    std::cout << "history written to " << a.history_out << "\n";
  }
}

struct FitArgs {
  std::string model_path;
  std::string data_path;
  std::string method = "nn";
  std::size_t bootstrap = 0;
  double level = 0.95;
  std::uint64_t seed = 0;
  int threads = 0;
  int restarts = 0;
  std::string out = "fit_report.csv";
};

void append_interval(std::ostream& os, const ConfidenceInterval& ci) {
  os << "," << ci.lower << "," << ci.upper;
}

void run_fit(const FitArgs& a) {
  const bool want_nn = a.method == "nn" || a.method == "both";
  const bool want_mle = a.method == "mle" || a.method == "both";

  NetworkModel model;
  if (want_nn) model = load_model(a.model_path);
  const SeriesTable table = read_series_csv(a.data_path);
  const auto sites = table.by_site();

  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot open for write: " + a.out);
  out << std::setprecision(17);
  out << "site_id,method,n,status,mu,sigma,xi,nll,converged,level,replicates,"
         "mu_lo,mu_hi,sigma_lo,sigma_hi,xi_lo,xi_hi,note\n";

  const int threads = resolve_threads(a.threads);
  std::size_t site_index = 0;
  for (const auto& [site, values] : sites) {
    const std::uint64_t site_seed = SplitMix64::derive(a.seed, site_index++);
    if (values.size() < kMinEstimationSamples) {
      if (want_nn) {
        out << site << ",nn," << values.size()
            << ",skipped_small_n,,,,,,,,,,,,,,n < 30\n";
      }
      if (want_mle) {
        out << site << ",mle," << values.size()
            << ",skipped_small_n,,,,,,,,,,,,,,n < 30\n";
      }
      std::cerr << "site " << site << ": skipped (n = " << values.size() << " < 30)\n";
      continue;
    }
    const GevSample y{values};

    if (want_nn) {
      try {
        std::string warning;
        const GevParams est = estimate(model, y, &warning);
        out << site << ",nn," << y.n() << ",ok," << est.mu << "," << est.sigma << ","
            << est.xi << ",,,";
        if (a.bootstrap > 0) {
          const BootstrapResult boot = parametric_bootstrap(
              model, est, y.n(), a.bootstrap, a.level, site_seed, threads);
          out << a.level << "," << a.bootstrap;
          for (const auto& ci : boot.intervals) append_interval(out, ci);
        } else {
          out << "," << ",,,,,,";
        }
        out << "," << warning << "\n";
      } catch (const DegenerateSampleError& e) {
        out << site << ",nn," << y.n() << ",degenerate,,,,,,,,,,,,,," << e.what() << "\n";
      }
    }

    if (want_mle) {
      try {
        MleOptions opts;
        opts.restarts = a.restarts;
        opts.restart_seed = SplitMix64::derive(site_seed, 1);
        MleFit fit = fit_mle(y, opts);
        std::string note;
        std::string ci_fields = ",,,,,,";
        std::string level_fields = ",";
        try {
          const auto cis = mle_confidence_intervals(fit, y, a.level);
          std::ostringstream ss;
          ss << std::setprecision(17);
          for (const auto& ci : cis) append_interval(ss, ci);
          ci_fields = ss.str();
          std::ostringstream lv;
          lv << std::setprecision(17) << a.level << ",";
          level_fields = lv.str();
        } catch (const CiUnavailableError& e) {
          note = e.what();
        }
        out << site << ",mle," << y.n() << ",ok," << fit.params.mu << ","
            << fit.params.sigma << "," << fit.params.xi << "," << fit.nll << ","
            << (fit.converged ? 1 : 0) << "," << level_fields << ci_fields << ","
            << note << "\n";
      } catch (const DegenerateSampleError& e) {
        out << site << ",mle," << y.n() << ",degenerate,,,,,,,,,,,,,," << e.what()
            << "\n";
      }
    }
  }
  std::cout << "report written to " << a.out << "\n";
}

struct BenchArgs {
  std::string model_path;
  std::string study;
  std::size_t n = 1000;
  std::size_t size = 1000;
  int grid_size = 10;
  int reps = 20;
  std::vector<std::size_t> sizes{72, 416, 1000};
  std::size_t bootstrap = 300;
  double level = 0.95;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir = ".";
};

void run_benchmark(const BenchArgs& a) {
  const NetworkModel model = load_model(a.model_path);
  const int threads = resolve_threads(a.threads);
  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);

  if (a.study == "deviations") {
    const DeviationStudy s =
        deviation_study(model, a.n, a.seed, ParameterRanges{}, a.size, threads);
    const std::string path = (dir / "fig2_deviations.csv").string();
    write_fig2_table(s, path);
    std::cout << "wrote " << path << " (" << s.cases.size() << " cases, "
              << s.mle_exclusions << " MLE exclusions)\n";
  } else if (a.study == "grid") {
    GridSpec grid;
    grid.sigma_axis = GridSpec::interior_axis(0.1, 40.0, a.grid_size);
    grid.xi_axis = GridSpec::interior_axis(-0.4, 0.4, a.grid_size);
    grid.replications = a.reps;
    grid.sizes = a.sizes;
    const MseGridResult r = mse_grid(model, grid, a.seed, threads);
    for (std::size_t size : a.sizes) {
      MseGridResult view;
      for (const auto& c : r.cells) {
        if (c.size == size) view.cells.push_back(c);
      }
      const std::string path =
          (dir / ("fig3_mse_size" + std::to_string(size) + ".csv")).string();
      write_fig3_table(view, path);
      std::cout << "wrote " << path << "\n";
    }
  } else if (a.study == "ratios") {
    const WidthRatioStudy s = width_ratio_study(model, a.n, a.size, a.bootstrap, a.level,
                                                a.seed, ParameterRanges{}, threads);
    const std::string path = (dir / "fig4_ratios.csv").string();
    write_fig4_table(s, path);
    std::cout << "wrote " << path << " (" << s.cases.size() - s.failures << "/"
              << s.cases.size() << " cases usable)\n";
  } else {  // timing; identical single-worker conditions for both estimators
    const TimingReport t = timing_benchmark(model, a.n, a.seed, a.size);
    const std::string path = (dir / "timing.csv").string();
    write_timing_table(t, path);
    std::cout << "wrote " << path << "\n";
    std::cout << "nn " << t.nn_seconds << " s, mle " << t.mle_seconds << " s, speedup "
              << std::fixed << std::setprecision(1) << t.speedup << "x (training "
              << t.training_seconds << " s, reported separately)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GEV parameter estimation with a quantile-input neural network"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "draw a seeded GEV sample to a file");
  c_sim->add_option("--mu", sim.mu, "location")->required();
  c_sim->add_option("--sigma", sim.sigma, "scale (> 0)")->required();
  c_sim->add_option("--xi", sim.xi, "shape in (-0.5, 0.5)")->required();
  c_sim->add_option("-n,--n", sim.n, "sample size")->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", sim.seed, "rng seed");
  c_sim->add_option("-o,--out", sim.out, "output file")->required();
  c_sim->callback([&] { run_simulate(sim); });

  DatasetArgs ds;
  auto* c_ds = app.add_subcommand("dataset", "build a simulated training dataset file");
  auto add_dataset_flags = [](CLI::App* cmd, DatasetArgs& d) {
    cmd->add_option("--scenario", d.scenario, "fixed | varying")
        ->check(CLI::IsMember({"fixed", "varying"}));
    cmd->add_option("--n-train", d.n_train, "training configurations");
    cmd->add_option("--n-valid", d.n_valid, "validation configurations");
    cmd->add_option("--size", d.size, "sample size for the fixed scenario");
    cmd->add_option("--sizes", d.sizes, "size set for the varying scenario")
        ->delimiter(',');
    cmd->add_option("--seed", d.seed, "rng seed");
    cmd->add_option("--threads", d.threads, "worker threads (0 = all cores)");
  };
  add_dataset_flags(c_ds, ds);
  c_ds->add_option("-o,--out", ds.out, "training records csv")->required();
  c_ds->add_option("--valid-out", ds.valid_out, "validation records csv");
  c_ds->callback([&] { run_dataset(ds); });

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "simulate data and train the estimator");
  add_dataset_flags(c_tr, tr.data);
  c_tr->add_option("--hidden", tr.hidden, "hidden layer widths")->delimiter(',');
  c_tr->add_option("--batch-size", tr.batch_size, "minibatch size");
  c_tr->add_option("--max-epochs", tr.max_epochs, "epoch cap");
  c_tr->add_option("--patience", tr.patience, "early-stopping patience");
  c_tr->add_option("--lr-patience", tr.lr_patience, "epochs before halving the rate");
  c_tr->add_option("--lr", tr.lr, "initial learning rate");
  c_tr->add_option("--min-lr", tr.min_lr, "plateau floor");
  c_tr->add_option("--lambda", tr.lambda, "penalty weight");
  c_tr->add_option("--penalty", tr.penalty, "hinge | indicator")
      ->check(CLI::IsMember({"hinge", "indicator"}));
  c_tr->add_option("-o,--out", tr.model_out, "model file");
  c_tr->add_option("--history", tr.history_out, "per-epoch history csv");
  c_tr->add_flag("--quiet", tr.quiet, "suppress epoch logging");
  c_tr->callback([&] { run_train(tr); });

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "fit each site in a series file");
  c_fit->add_option("--model", fit.model_path, "model file (nn / both)");
  c_fit->add_option("--data", fit.data_path, "series csv or one-value-per-line file")
      ->required();
  c_fit->add_option("--method", fit.method, "nn | mle | both")
      ->check(CLI::IsMember({"nn", "mle", "both"}));
  c_fit->add_option("--bootstrap", fit.bootstrap, "bootstrap replicates (0 = off)");
  c_fit->add_option("--level", fit.level, "confidence level");
  c_fit->add_option("--seed", fit.seed, "rng seed");
  c_fit->add_option("--threads", fit.threads, "worker threads (0 = all cores)");
  c_fit->add_option("--restarts", fit.restarts, "extra jittered MLE starts");
  c_fit->add_option("-o,--out", fit.out, "report csv");
  c_fit->callback([&] {
    if ((fit.method == "nn" || fit.method == "both") && fit.model_path.empty()) {
      throw CLI::ValidationError("--model is required for method " + fit.method);
    }
    run_fit(fit);
  });

  BenchArgs bench;
  auto* c_b = app.add_subcommand("benchmark", "run the simulation-study reports");
  c_b->add_option("--model", bench.model_path, "model file")->required();
  c_b->add_option("--study", bench.study, "deviations | grid | ratios | timing")
      ->required()
      ->check(CLI::IsMember({"deviations", "grid", "ratios", "timing"}));
  c_b->add_option("--n", bench.n, "test cases");
  c_b->add_option("--size", bench.size, "sample size per case");
  c_b->add_option("--grid-size", bench.grid_size, "axis points (grid study)");
  c_b->add_option("--reps", bench.reps, "replications per cell (grid study)");
  c_b->add_option("--sizes", bench.sizes, "sizes for the grid study")->delimiter(',');
  c_b->add_option("--bootstrap", bench.bootstrap, "replicates (ratios study)");
  c_b->add_option("--level", bench.level, "confidence level (ratios study)");
  c_b->add_option("--seed", bench.seed, "rng seed");
  c_b->add_option("--threads", bench.threads, "worker threads (0 = all cores)");
  c_b->add_option("--out-dir", bench.out_dir, "output directory");
  c_b->callback([&] { run_benchmark(bench); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const gevnet::TrainingDivergedError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
