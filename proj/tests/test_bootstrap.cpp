#include "gevnet/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "gevnet/summaries.hpp"
#include "gevnet/training.hpp"
#include "testkit.hpp"

using namespace gevnet;

namespace {

// A small model trained well enough that bootstrap replicates track the
// truth; shared by the tests below.
NetworkModel toy_model() {
  DatasetSpec spec;
  spec.n_train = 3000;
  spec.n_valid = 500;
  spec.fixed_size = 100;
  spec.seed = 100;
  const BuiltDatasets data = build_dataset(spec, ParameterRanges{}, 2);
  TrainConfig config;
  config.max_epochs = 30;
  config.seed = 100;
  return train(NetworkModel::make({11, 32, 3}, 100), data.train.records,
               data.valid.records, config)
      .model;
}

void test_intervals(const NetworkModel& model) {
  testkit::section("percentile intervals");
  const GevParams theta(20, 5, 0.1);
  const BootstrapResult r =
      parametric_bootstrap(model, theta, 100, 900, 0.95, 77, 2);
  CHECK(r.replicates.size() == 900);
  bool ranges_ok = true;
  for (const auto& rep : r.replicates) {
    ranges_ok = ranges_ok && rep[1] > 0.0 && std::fabs(rep[2]) < 0.5;
  }
  CHECK(ranges_ok);

  // Endpoints sit at type-7 ranks h = 23.475 and 877.525 of the sorted
  // replicates (B = 900, level 0.95).
  for (int j = 0; j < 3; ++j) {
    std::vector<double> col;
    for (const auto& rep : r.replicates) col.push_back(rep[j]);
    std::sort(col.begin(), col.end());
    const double lower = col[22] + 0.475 * (col[23] - col[22]);
    const double upper = col[876] + 0.525 * (col[877] - col[876]);
    CHECK_CLOSE(r.intervals[j].lower, lower, 1e-12);
    CHECK_CLOSE(r.intervals[j].upper, upper, 1e-12);
    CHECK(r.intervals[j].lower <= r.intervals[j].upper);
    CHECK(r.intervals[j].method == CiMethod::bootstrap_nn);
    CHECK(r.intervals[j].replicates == 900);
  }

  // Determinism, including across thread counts.
  const BootstrapResult r2 = parametric_bootstrap(model, theta, 100, 900, 0.95, 77, 1);
  CHECK(r2.replicates == r.replicates);
  CHECK(r2.intervals[0].lower == r.intervals[0].lower);

  // Monotone in level: the 90% interval nests inside the 99% one.
  const BootstrapResult narrow = parametric_bootstrap(model, theta, 100, 300, 0.90, 5);
  const BootstrapResult wide = parametric_bootstrap(model, theta, 100, 300, 0.99, 5);
  for (int j = 0; j < 3; ++j) {
    CHECK(wide.intervals[j].lower <= narrow.intervals[j].lower);
    CHECK(wide.intervals[j].upper >= narrow.intervals[j].upper);
  }

  CHECK_THROWS(std::domain_error, parametric_bootstrap(model, theta, 10, 300, 0.95, 1));
  CHECK_THROWS(std::domain_error, parametric_bootstrap(model, theta, 100, 1, 0.95, 1));
  CHECK_THROWS(std::domain_error, parametric_bootstrap(model, theta, 100, 300, 1.5, 1));
}

void test_containment(const NetworkModel& model) {
  testkit::section("point-estimate containment (monitored)");
  int contained = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng(SplitMix64::derive(3000, t));
    const GevParams truth(rng.next_uniform(5, 45), rng.next_uniform(1, 30),
                          rng.next_uniform(-0.3, 0.3));
    const GevSample y = sample(truth, 100, SplitMix64::derive(3001, t));
    GevParams theta_hat = truth;
    try {
      theta_hat = estimate(model, y);
    } catch (const DegenerateSampleError&) {
      continue;
    }
    const BootstrapResult r =
        parametric_bootstrap(model, theta_hat, 100, 200, 0.95, SplitMix64::derive(3002, t), 2);
    const double vals[3] = {theta_hat.mu, theta_hat.sigma, theta_hat.xi};
    bool inside = true;
    for (int j = 0; j < 3; ++j) {
      inside = inside && vals[j] >= r.intervals[j].lower && vals[j] <= r.intervals[j].upper;
    }
    contained += inside ? 1 : 0;
  }
  std::printf("   containment rate: %d/%d trials\n", contained, trials);
  CHECK_MSG(contained >= trials / 2, "containment collapsed: %d/%d", contained, trials);
}

void test_width_ratio() {
  testkit::section("ci_width_ratio");
  const ConfidenceInterval b{1.0, 3.0, 0.95, CiMethod::bootstrap_nn, 300};
  const ConfidenceInterval l{0.0, 1.0, 0.95, CiMethod::likelihood, 0};
  CHECK(ci_width_ratio(b, l) == 2.0);
  CHECK(ci_width_ratio(l, l) == 1.0);
  const ConfidenceInterval zero{2.0, 2.0, 0.95, CiMethod::likelihood, 0};
  CHECK_THROWS(std::domain_error, ci_width_ratio(b, zero));
}

}  // namespace

int main() {
  const NetworkModel model = toy_model();
  test_intervals(model);
  test_containment(model);
  test_width_ratio();
  return testkit::summary();
}
