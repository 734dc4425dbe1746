#include "gevnet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "gevnet/parallel.hpp"
#include "gevnet/rng.hpp"

namespace gevnet {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = count * w / workers;
    const std::size_t hi = count * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<GevParams> sample_parameter_configs(std::size_t count,
                                                const ParameterRanges& ranges,
                                                std::uint64_t seed) {
  std::vector<GevParams> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SplitMix64 rng(SplitMix64::derive(seed, i));
    const double mu = rng.next_uniform(ranges.mu.first, ranges.mu.second);
    const double sigma = rng.next_uniform(ranges.sigma.first, ranges.sigma.second);
    const double xi = rng.next_uniform(ranges.xi.first, ranges.xi.second);
    out.emplace_back(mu, sigma, xi);
  }
  return out;
}

namespace {

// Substream labels hung off the dataset seed.
enum : std::uint64_t { kConfigStream = 1, kSizeStream = 2, kSampleStream = 3 };

void shuffle_indices(std::vector<std::size_t>& idx, SplitMix64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

BuiltDatasets build_dataset(const DatasetSpec& spec, const ParameterRanges& ranges,
                            int threads) {
  const std::size_t total = spec.n_train + spec.n_valid;
  if (total == 0) return {};
  if (spec.scenario == Scenario::varying_size) {
    if (spec.sizes.empty()) {
      throw std::invalid_argument("varying_size scenario needs a size set");
    }
    for (std::size_t s : spec.sizes) {
      if (s < 30 || s > 1000) {
        throw std::invalid_argument("varying sizes must lie in [30, 1000]");
      }
    }
  } else if (spec.fixed_size < 30) {
    throw std::invalid_argument("fixed_size must be >= 30");
  }

  const std::vector<GevParams> configs =
      sample_parameter_configs(total, ranges, SplitMix64::derive(spec.seed, kConfigStream));

  // Sample size per configuration: fixed, or the size set repeated in equal
  // counts and permuted (the remainder spills onto the leading sizes).
  std::vector<std::size_t> sizes(total, spec.fixed_size);
  if (spec.scenario == Scenario::varying_size) {
    for (std::size_t i = 0; i < total; ++i) sizes[i] = spec.sizes[i % spec.sizes.size()];
    std::vector<std::size_t> perm(total);
    std::iota(perm.begin(), perm.end(), 0);
    SplitMix64 rng(SplitMix64::derive(spec.seed, kSizeStream));
    shuffle_indices(perm, rng);
    std::vector<std::size_t> permuted(total);
    for (std::size_t i = 0; i < total; ++i) permuted[i] = sizes[perm[i]];
    sizes = std::move(permuted);
  }

  std::vector<TrainingRecord> records(total);
  std::vector<std::uint32_t> redraw_counts(total, 0);
  const std::uint64_t sample_seed = SplitMix64::derive(spec.seed, kSampleStream);

  parallel_for(total, threads, [&](std::size_t i) {
    const GevParams& truth = configs[i];
    const std::uint64_t record_seed = SplitMix64::derive(sample_seed, i);
    for (std::uint32_t attempt = 0;; ++attempt) {
      try {
        const GevSample y = sample(truth, sizes[i], SplitMix64::derive(record_seed, attempt));
        QuantileSummary summary = summarize(y);
        const GevParams target = standardize_params(truth, summary.info);
        records[i] = TrainingRecord{std::move(summary), target, sizes[i]};
        redraw_counts[i] = attempt;
        return;
      } catch (const DegenerateSampleError&) {
        // redraw from the next attempt stream
      }
    }
  });

  BuiltDatasets out;
  out.train.records.assign(records.begin(), records.begin() + spec.n_train);
  out.train.truths.assign(configs.begin(), configs.begin() + spec.n_train);
  out.valid.records.assign(records.begin() + spec.n_train, records.end());
  out.valid.truths.assign(configs.begin() + spec.n_train, configs.end());
  for (std::size_t i = 0; i < total; ++i) {
    (i < spec.n_train ? out.train.redraws : out.valid.redraws) += redraw_counts[i];
  }
  return out;
}

double validation_loss(const NetworkModel& model, const std::vector<TrainingRecord>& records,
                       std::size_t batch_size, double lambda) {
  if (records.empty()) throw std::invalid_argument("validation_loss: empty set");
  if (batch_size == 0) throw std::invalid_argument("validation_loss: batch_size");
  double weighted = 0.0;
  std::vector<GevParams> preds, targets;
  for (std::size_t lo = 0; lo < records.size(); lo += batch_size) {
    const std::size_t hi = std::min(lo + batch_size, records.size());
    preds.clear();
    targets.clear();
    for (std::size_t i = lo; i < hi; ++i) {
      preds.push_back(forward(model, records[i].summary.percentiles).params_std);
      targets.push_back(records[i].target_std);
    }
    const std::span<const TrainingRecord> batch(records.data() + lo, hi - lo);
    const BatchLoss l = batch_loss(preds, targets, batch, lambda, PenaltyMode::indicator);
    weighted += l.total * static_cast<double>(hi - lo);
  }
  return weighted / static_cast<double>(records.size());
}

TrainResult train(NetworkModel initial, const std::vector<TrainingRecord>& train_set,
                  const std::vector<TrainingRecord>& valid_set, const TrainConfig& config) {
  if (train_set.empty() || valid_set.empty()) {
    throw std::invalid_argument("train: datasets must be nonempty");
  }
  if (config.batch_size == 0 || config.max_epochs < 1) {
    throw std::invalid_argument("train: bad config");
  }

  const auto t_start = std::chrono::steady_clock::now();
  NetworkModel model = std::move(initial);
  OptimizerState opt = OptimizerState::init(model, config.learning_rate);

  TrainingHistory history;
  std::vector<LayerGrads> best_weights;
  double best_valid = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int stale_early = 0;
  int stale_lr = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainingRecord> batch;
  batch.reserve(config.batch_size);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    SplitMix64 shuffle_rng(SplitMix64::derive(config.seed, epoch));
    shuffle_indices(order, shuffle_rng);

    double train_weighted = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += config.batch_size) {
      const std::size_t hi = std::min(lo + config.batch_size, order.size());
      batch.clear();
      for (std::size_t k = lo; k < hi; ++k) batch.push_back(train_set[order[k]]);
      BatchEval ev = backward_with_loss(model, batch, config.lambda, config.penalty_mode);
      if (!std::isfinite(ev.optimized.total)) {
        throw TrainingDivergedError("non-finite training loss at epoch " +
                                    std::to_string(epoch));
      }
      rmsprop_step(opt, model, ev.grads);
      train_weighted += ev.indicator.total * static_cast<double>(hi - lo);
    }
    const double train_loss = train_weighted / static_cast<double>(train_set.size());
    const double valid = validation_loss(model, valid_set, config.batch_size, config.lambda);
    if (!std::isfinite(valid)) {
      throw TrainingDivergedError("non-finite validation loss at epoch " +
                                  std::to_string(epoch));
    }
    history.epochs.push_back(EpochStats{epoch, train_loss, valid, opt.learning_rate});
    if (config.log_epochs) {
      std::fprintf(stderr, "epoch %3d  train %.6f  valid %.6f  lr %.2e\n", epoch,
                   train_loss, valid, opt.learning_rate);
    }

    if (valid < best_valid) {
      best_valid = valid;
      best_epoch = epoch;
      stale_early = 0;
      stale_lr = 0;
      best_weights.clear();
      for (const auto& l : model.layers) best_weights.push_back({l.weights, l.biases});
    } else {
      ++stale_early;
      ++stale_lr;
      if (stale_lr >= config.lr_patience && opt.learning_rate > config.min_lr) {
        opt.learning_rate = std::max(opt.learning_rate * config.lr_factor, config.min_lr);
        stale_lr = 0;
      }
      if (stale_early >= config.early_stop_patience) break;
    }
  }

  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    model.layers[l].weights = best_weights[l].weights;
    model.layers[l].biases = best_weights[l].biases;
  }
  history.best_epoch = best_epoch;
  history.best_valid_loss = best_valid;

  model.metadata.epochs_run = static_cast<int>(history.epochs.size());
  model.metadata.best_epoch = best_epoch;
  model.metadata.final_valid_loss = best_valid;
  model.metadata.training_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  return TrainResult{std::move(model), std::move(history)};
}

GevParams estimate(const NetworkModel& model, const GevSample& sample, std::string* warning) {
  const std::size_t n = sample.n();
  if (n < kMinEstimationSamples) {
    throw std::invalid_argument("estimate requires n >= 30");
  }
  if (warning && n < kSmallSampleWarning) {
    *warning = "sample size " + std::to_string(n) +
               " is below 72; percentile inputs are coarse";
  }
  const QuantileSummary summary = summarize(sample, model.pset);
  const ForwardResult fr = forward(model, summary.percentiles);
  return destandardize_params(fr.params_std, summary.info);
}

}  // namespace gevnet
