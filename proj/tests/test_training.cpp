#include "gevnet/training.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "gevnet/rng.hpp"
#include "testkit.hpp"

using namespace gevnet;

namespace {

void test_parameter_configs() {
  testkit::section("sample_parameter_configs");
  const ParameterRanges ranges;
  CHECK(sample_parameter_configs(0, ranges, 1).empty());

  const auto configs = sample_parameter_configs(10000, ranges, 42);
  double sum_mu = 0, sum_sigma = 0, sum_xi = 0;
  bool inside = true;
  for (const auto& c : configs) {
    inside = inside && c.mu > 1.0 && c.mu < 50.0 && c.sigma > 0.1 && c.sigma < 40.0 &&
             c.xi > -0.4 && c.xi < 0.4;
    sum_mu += c.mu;
    sum_sigma += c.sigma;
    sum_xi += c.xi;
  }
  CHECK(inside);
  const double n = configs.size();
  // Uniform means within 3 standard errors of the interval midpoints.
  CHECK_CLOSE(sum_mu / n, 25.5, 3 * 49.0 / std::sqrt(12.0 * n));
  CHECK_CLOSE(sum_sigma / n, 20.05, 3 * 39.9 / std::sqrt(12.0 * n));
  CHECK_CLOSE(sum_xi / n, 0.0, 3 * 0.8 / std::sqrt(12.0 * n));

  CHECK(sample_parameter_configs(5, ranges, 9) == sample_parameter_configs(5, ranges, 9));
}

DatasetSpec toy_spec(std::size_t n_train, std::size_t n_valid, std::uint64_t seed) {
  DatasetSpec spec;
  spec.n_train = n_train;
  spec.n_valid = n_valid;
  spec.fixed_size = 100;
  spec.seed = seed;
  return spec;
}

void test_build_dataset() {
  testkit::section("build_dataset");
  const ParameterRanges ranges;

  DatasetSpec fixed = toy_spec(24, 8, 3);
  fixed.fixed_size = 1000;
  const BuiltDatasets d = build_dataset(fixed, ranges);
  CHECK(d.train.records.size() == 24);
  CHECK(d.valid.records.size() == 8);
  bool all_1000 = true;
  for (const auto& r : d.train.records) all_1000 = all_1000 && r.sample_size == 1000;
  CHECK(all_1000);

  // Target consistency: the stored standardized target is exactly the
  // standardized truth, and maps back to it.
  for (std::size_t i = 0; i < d.train.records.size(); ++i) {
    const auto& rec = d.train.records[i];
    const GevParams expected = standardize_params(d.train.truths[i], rec.summary.info);
    CHECK(rec.target_std.mu == expected.mu && rec.target_std.sigma == expected.sigma &&
          rec.target_std.xi == expected.xi);
    const GevParams back = destandardize_params(rec.target_std, rec.summary.info);
    CHECK_CLOSE(back.mu, d.train.truths[i].mu, 1e-10);
    CHECK_CLOSE(back.sigma, d.train.truths[i].sigma, 1e-10);
  }

  // Varying sizes are assigned in equal counts over train+valid.
  DatasetSpec varying = toy_spec(80, 20, 7);
  varying.scenario = Scenario::varying_size;
  varying.sizes = {30, 72, 182, 416, 1000};
  const BuiltDatasets v = build_dataset(varying, ranges, 2);
  std::map<std::size_t, int> counts;
  for (const auto& r : v.train.records) counts[r.sample_size]++;
  for (const auto& r : v.valid.records) counts[r.sample_size]++;
  CHECK(counts.size() == 5);
  for (const auto& [size, c] : counts) CHECK_MSG(c == 20, "size %zu count %d", size, c);

  // Reproducible, and independent of the thread count.
  const BuiltDatasets v1 = build_dataset(varying, ranges, 1);
  REQUIRE(v1.train.records.size() == v.train.records.size());
  bool same = v1.train.redraws == v.train.redraws;
  for (std::size_t i = 0; i < v1.train.records.size(); ++i) {
    same = same && v1.train.records[i].summary.percentiles ==
                       v.train.records[i].summary.percentiles &&
           v1.train.records[i].sample_size == v.train.records[i].sample_size;
  }
  CHECK(same);

  DatasetSpec bad = varying;
  bad.sizes = {10, 1000};
  CHECK_THROWS(std::invalid_argument, build_dataset(bad, ranges));
}

void test_train_loop() {
  testkit::section("train");
  const ParameterRanges ranges;
  const BuiltDatasets data = build_dataset(toy_spec(500, 100, 11), ranges, 2);

  TrainConfig config;
  config.max_epochs = 8;
  config.seed = 2;
  auto run = [&] {
    return train(NetworkModel::make({11, 16, 3}, 1), data.train.records,
                 data.valid.records, config);
  };
  const TrainResult a = run();
  CHECK(a.history.epochs.size() <= 8);
  REQUIRE(a.history.epochs.size() >= 3);
  CHECK(a.history.epochs[1].train_loss < a.history.epochs[0].train_loss);
  CHECK(a.history.epochs[2].train_loss < a.history.epochs[1].train_loss);

  // Identical seeds give an identical trajectory and identical weights.
  const TrainResult b = run();
  REQUIRE(a.history.epochs.size() == b.history.epochs.size());
  bool same_hist = true;
  for (std::size_t e = 0; e < a.history.epochs.size(); ++e) {
    same_hist = same_hist &&
                a.history.epochs[e].train_loss == b.history.epochs[e].train_loss &&
                a.history.epochs[e].valid_loss == b.history.epochs[e].valid_loss;
  }
  CHECK(same_hist);
  CHECK(a.model.layers[0].weights == b.model.layers[0].weights);

  // Best-epoch weights restored: recomputing the validation loss of the
  // returned model reproduces the history minimum exactly.
  double min_valid = a.history.epochs[0].valid_loss;
  for (const auto& e : a.history.epochs) min_valid = std::min(min_valid, e.valid_loss);
  CHECK(a.history.best_valid_loss == min_valid);
  CHECK(validation_loss(a.model, data.valid.records, config.batch_size, config.lambda) ==
        a.history.best_valid_loss);

  // Early stopping terminates after `patience` stale epochs.
  TrainConfig stopper = config;
  stopper.max_epochs = 150;
  stopper.early_stop_patience = 2;
  stopper.lr_patience = 1;
  const TrainResult s = train(NetworkModel::make({11, 8, 3}, 4), data.train.records,
                              data.valid.records, stopper);
  if (s.history.epochs.size() < 150) {
    CHECK(static_cast<int>(s.history.epochs.size()) - s.history.best_epoch == 2);
  }
  CHECK(s.model.metadata.best_epoch == s.history.best_epoch);

  // A target far outside the representable error range overflows the squared
  // loss; training must abort with a diagnostic instead of looping on inf.
  std::vector<TrainingRecord> poisoned = data.train.records;
  poisoned[0].target_std = GevParams::unchecked(0.0, 1e200, 0.0);
  TrainConfig once = config;
  once.max_epochs = 1;
  CHECK_THROWS(TrainingDivergedError,
               train(NetworkModel::make({11, 8, 3}, 2), poisoned, data.valid.records, once));
}

void test_estimate() {
  testkit::section("estimate");
  const ParameterRanges ranges;
  const BuiltDatasets data = build_dataset(toy_spec(400, 80, 19), ranges, 2);
  TrainConfig config;
  config.max_epochs = 6;
  config.seed = 5;
  const TrainResult tr =
      train(NetworkModel::make({11, 16, 3}, 8), data.train.records, data.valid.records, config);

  const GevSample y = sample(GevParams(25, 10, 0.2), 400, std::uint64_t{33});
  const GevParams base = estimate(tr.model, y);
  CHECK(base.sigma > 0.0);
  CHECK(std::fabs(base.xi) < 0.5);

  // Affine equivariance, bit-exact for a binary-exact scale map.
  const double a = 0.25;
  std::vector<double> scaled(y.values);
  for (double& v : scaled) v *= a;
  const GevParams se = estimate(tr.model, GevSample(scaled));
  CHECK(se.mu == a * base.mu);
  CHECK(se.sigma == a * base.sigma);
  CHECK(se.xi == base.xi);

  // General affine map agrees to rounding noise.
  const double a2 = 2.7, b2 = -13.4;
  std::vector<double> mapped(y.values);
  for (double& v : mapped) v = a2 * v + b2;
  const GevParams ge = estimate(tr.model, GevSample(mapped));
  CHECK_CLOSE(ge.mu, a2 * base.mu + b2, 1e-8 * std::max(1.0, std::fabs(a2 * base.mu + b2)));
  CHECK_CLOSE(ge.sigma, a2 * base.sigma, 1e-8 * a2 * base.sigma);
  CHECK_CLOSE(ge.xi, base.xi, 1e-9);

  CHECK_THROWS(std::invalid_argument,
               estimate(tr.model, sample(GevParams(0, 1, 0), 29, std::uint64_t{1})));
  CHECK_THROWS(DegenerateSampleError,
               estimate(tr.model, GevSample(std::vector<double>(50, 3.0))));

  std::string warning;
  (void)estimate(tr.model, sample(GevParams(0, 1, 0), 40, std::uint64_t{2}), &warning);
  CHECK(!warning.empty());
  warning.clear();
  (void)estimate(tr.model, sample(GevParams(0, 1, 0), 72, std::uint64_t{2}), &warning);
  CHECK(warning.empty());
}

}  // namespace

int main() {
  test_parameter_configs();
  test_build_dataset();
  test_train_loop();
  test_estimate();
  return testkit::summary();
}
