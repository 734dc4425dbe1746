#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gevnet/gev.hpp"
#include "gevnet/network.hpp"
#include "gevnet/summaries.hpp"

namespace gevnet {

// Simulation ranges for the training truth, sampled uniformly per component.
struct ParameterRanges {
  std::pair<double, double> mu{1.0, 50.0};
  std::pair<double, double> sigma{0.1, 40.0};
  std::pair<double, double> xi{-0.4, 0.4};
};

enum class Scenario { fixed_size, varying_size };

// Desk-scale defaults: a tenth of the 300,000/40,000 configuration split,
// sized so the full pipeline trains on a CPU in minutes.
struct DatasetSpec {
  std::size_t n_train = 30000;
  std::size_t n_valid = 4000;
  Scenario scenario = Scenario::fixed_size;
  std::size_t fixed_size = 1000;
  std::vector<std::size_t> sizes{30, 72, 182, 416, 1000};  // varying_size scenario
  std::uint64_t seed = 0;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  int max_epochs = 150;
  int early_stop_patience = 10;  // epochs without validation improvement
  int lr_patience = 5;           // stale epochs before the rate is halved
  double lr_factor = 0.5;
  double min_lr = 1e-5;
  double learning_rate = 0.001;
  double lambda = 1.0;
  PenaltyMode penalty_mode = PenaltyMode::hinge;  // gradients; reporting is indicator
  std::uint64_t seed = 0;                         // epoch shuffling
  bool log_epochs = false;                        // one stderr line per epoch
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double learning_rate = 0.0;
};

struct TrainingHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based epoch with minimal validation loss
  double best_valid_loss = 0.0;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::vector<TrainingRecord> records;
  std::vector<GevParams> truths;  // raw-scale parameters, aligned with records
  std::size_t redraws = 0;        // degenerate samples replaced by fresh streams
};

struct BuiltDatasets {
  Dataset train;
  Dataset valid;
};

// `count` uniform draws from the ranges; reproducible under the seed.
std::vector<GevParams> sample_parameter_configs(std::size_t count,
                                                const ParameterRanges& ranges,
                                                std::uint64_t seed);

// Simulate train+valid records: per configuration draw a GEV sample (size per
// scenario; varying sizes are assigned in equal counts, randomly permuted),
// standardize, summarize, and store the standardized target. Degenerate-IQR
// draws are replaced from a fresh seed stream and counted.
BuiltDatasets build_dataset(const DatasetSpec& spec, const ParameterRanges& ranges,
                            int threads = 1);

// Record-weighted penalized loss (indicator penalty) over consecutive
// batches of `batch_size`; used for validation and reporting.
double validation_loss(const NetworkModel& model, const std::vector<TrainingRecord>& records,
                       std::size_t batch_size, double lambda);

struct TrainResult {
  NetworkModel model;
  TrainingHistory history;
};

// Mini-batch RMSprop with plateau halving and early stopping; restores the
// best-epoch weights. The initial model provides the architecture and seed.
TrainResult train(NetworkModel initial, const std::vector<TrainingRecord>& train_set,
                  const std::vector<TrainingRecord>& valid_set, const TrainConfig& config);

// End-to-end estimator: summarize -> forward -> back-transform. Requires
// n >= 30; sets *warning for 30 <= n < 72 (trained percentile resolution
// starts degrading there).
GevParams estimate(const NetworkModel& model, const GevSample& sample,
                   std::string* warning = nullptr);

inline constexpr std::size_t kMinEstimationSamples = 30;
inline constexpr std::size_t kSmallSampleWarning = 72;

}  // namespace gevnet
