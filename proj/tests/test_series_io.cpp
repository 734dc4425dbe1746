#include "gevnet/series_io.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gevnet/training.hpp"
#include "testkit.hpp"

using namespace gevnet;

namespace {

const std::string kTmp = "/tmp/gevnet_io_test";

std::string path_of(const std::string& name) { return kTmp + "_" + name; }

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(GEVNET_CLI_PATH) + " " + args + " >> " + path_of("cli.log") + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_lines(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++n;
  }
  return n;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

void test_series_round_trip() {
  testkit::section("series csv round trip");
  SeriesTable t;
  t.records = {{"alpha", 1950, 31.25}, {"alpha", 1951, 29.5}, {"beta", 1950, 12.125}};
  const std::string path = path_of("series.csv");
  write_series_csv(t, path);
  const SeriesTable r = read_series_csv(path);
  REQUIRE(r.records.size() == 3);
  bool same = true;
  for (std::size_t i = 0; i < 3; ++i) {
    same = same && r.records[i].site_id == t.records[i].site_id &&
           r.records[i].year == t.records[i].year &&
           r.records[i].value == t.records[i].value;
  }
  CHECK(same);
  const auto grouped = r.by_site();
  CHECK(grouped.size() == 2);
  CHECK(grouped.at("alpha").size() == 2);

  write_text(path_of("single.csv"), "# comment\n1.5\n2.5\n3.5\n");
  const SeriesTable s = read_series_csv(path_of("single.csv"));
  CHECK(s.records.size() == 3);
  CHECK(s.records[0].site_id == "series");
  CHECK(s.records[2].value == 3.5);

  write_text(path_of("dup.csv"), "site_id,year,value\na,1,1.0\na,1,2.0\n");
  CHECK_THROWS(ParseError, read_series_csv(path_of("dup.csv")));
  write_text(path_of("badnum.csv"), "site_id,year,value\na,1,zebra\n");
  CHECK_THROWS(ParseError, read_series_csv(path_of("badnum.csv")));
  write_text(path_of("inf.csv"), "site_id,year,value\na,1,inf\n");
  CHECK_THROWS(ParseError, read_series_csv(path_of("inf.csv")));
  write_text(path_of("empty.csv"), "# nothing\n");
  CHECK_THROWS(ParseError, read_series_csv(path_of("empty.csv")));
}

void test_dataset_round_trip() {
  testkit::section("dataset csv round trip");
  DatasetSpec spec;
  spec.n_train = 20;
  spec.n_valid = 0;
  spec.fixed_size = 100;
  spec.seed = 31;
  const BuiltDatasets data = build_dataset(spec, ParameterRanges{});
  const std::string path = path_of("dataset.csv");
  write_dataset_csv(data.train.records, PercentileSet::standard(), path);
  const DatasetFile file = read_dataset_csv(path);
  REQUIRE(file.records.size() == 20);
  CHECK(file.pset.probs == PercentileSet::standard().probs);
  bool same = true;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& a = data.train.records[i];
    const auto& b = file.records[i];
    same = same && a.summary.percentiles == b.summary.percentiles &&
           a.summary.sample_min == b.summary.sample_min &&
           a.summary.sample_max == b.summary.sample_max &&
           a.summary.info.mean == b.summary.info.mean &&
           a.summary.info.iqr == b.summary.info.iqr &&
           a.target_std == b.target_std && a.sample_size == b.sample_size;
  }
  CHECK(same);  // bit-exact round trip

  write_text(path_of("nohdr.csv"), "1,2,3\n");
  CHECK_THROWS(ParseError, read_dataset_csv(path_of("nohdr.csv")));
}

void test_history() {
  testkit::section("history csv");
  TrainingHistory h;
  h.epochs = {{1, 0.5, 0.6, 1e-3}, {2, 0.4, 0.55, 1e-3}, {3, 0.35, 0.56, 1e-3}};
  h.best_epoch = 2;
  h.best_valid_loss = 0.55;
  const std::string path = path_of("history.csv");
  write_history_csv(h, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,train_loss,valid_loss,learning_rate,is_best");
  std::size_t rows = 0;
  bool best_marked = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("2,", 0) == 0) best_marked = line.back() == '1';
  }
  CHECK(rows == 3);
  CHECK(best_marked);
}

void test_cli() {
  testkit::section("command-line round trips");
  std::remove(path_of("cli.log").c_str());

  // simulate: seeded, replayable, refuses bad parameters before writing
  const std::string sim1 = path_of("sim1.csv");
  const std::string sim2 = path_of("sim2.csv");
  CHECK(run_cli("simulate --mu 25 --sigma 10 --xi 0.2 -n 5 --seed 9 -o " + sim1) == 0);
  CHECK(data_lines(sim1) == 5);
  CHECK(run_cli("simulate --mu 25 --sigma 10 --xi 0.2 -n 5 --seed 9 -o " + sim2) == 0);
  CHECK(slurp(sim1) == slurp(sim2));
  const std::string bad = path_of("bad.csv");
  std::remove(bad.c_str());
  CHECK(run_cli("simulate --mu 0 --sigma -1 --xi 0 -n 5 -o " + bad) == 1);
  CHECK(!std::ifstream(bad).good());

  // train a small model
  const std::string model = path_of("model.json");
  const std::string hist = path_of("hist.csv");
  CHECK(run_cli("train --scenario fixed --n-train 6000 --n-valid 800 --size 100 "
                "--seed 3 --hidden 32 --max-epochs 40 --batch-size 64 --lr 0.001 "
                "--quiet -o " + model + " --history " + hist) == 0);
  const NetworkModel m = load_model(model);
  CHECK(m.metadata.epochs_run >= 1);
  CHECK(data_lines(hist) == static_cast<std::size_t>(m.metadata.epochs_run) + 1);

  // fit a simulated single-site file with both estimators
  const std::string data = path_of("fitdata.csv");
  CHECK(run_cli("simulate --mu 25 --sigma 10 --xi 0.2 -n 400 --seed 5 -o " + data) == 0);
  const std::string report = path_of("fit.csv");
  CHECK(run_cli("fit --model " + model + " --data " + data +
                " --method both --bootstrap 50 --level 0.95 --seed 2 -o " + report) == 0);
  std::ifstream rep(report);
  std::string line, nn_row, mle_row;
  std::getline(rep, line);  // header
  std::size_t rows = 0;
  while (std::getline(rep, line)) {
    ++rows;
    if (line.find(",nn,") != std::string::npos) nn_row = line;
    if (line.find(",mle,") != std::string::npos) mle_row = line;
  }
  CHECK(rows == 2);
  REQUIRE(!nn_row.empty() && !mle_row.empty());
  // nn row carries bootstrap interval columns and plausible estimates
  {
    std::vector<std::string> f;
    std::istringstream ss(nn_row);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    REQUIRE(f.size() >= 17);
    CHECK(f[2] == "400");  // every simulated value was parsed
    CHECK(f[3] == "ok");
    const double mu = std::stod(f[4]), sigma = std::stod(f[5]), xi = std::stod(f[6]);
    CHECK_MSG(std::fabs(mu - 25) < 8, "nn mu %.2f", mu);
    CHECK_MSG(sigma > 3 && sigma < 25, "nn sigma %.2f", sigma);
    CHECK_MSG(std::fabs(xi - 0.2) < 0.4, "nn xi %.2f", xi);
    CHECK(f[10] == "50");           // replicates
    CHECK(!f[11].empty() && !f[12].empty());  // mu interval populated
  }

  // error paths: missing model, unknown study
  CHECK(run_cli("fit --model /nonexistent.json --data " + data + " --method nn") == 1);
  CHECK(run_cli("benchmark --model " + model + " --study nonsense") == 1);

  // timing smoke test through the benchmark surface
  CHECK(run_cli("benchmark --model " + model + " --study timing --n 4 --size 100 "
                "--seed 1 --out-dir " + kTmp + "_bench") == 0);
  CHECK(data_lines(kTmp + "_bench/timing.csv") == 3);
}

}  // namespace

int main() {
  test_series_round_trip();
  test_dataset_round_trip();
  test_history();
  test_cli();
  return testkit::summary();
}
