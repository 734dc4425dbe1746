#pragma once

#include <map>
#include <string>
#include <vector>

#include "gevnet/network.hpp"
#include "gevnet/summaries.hpp"
#include "gevnet/training.hpp"

namespace gevnet {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Long-format observations: one row per (site, year). Years are unique per
// site and values finite.
struct SeriesRecord {
  std::string site_id;
  int year = 0;
  double value = 0.0;
};

struct SeriesTable {
  std::vector<SeriesRecord> records;

  // Values grouped per site, ordered by site_id.
  std::map<std::string, std::vector<double>> by_site() const;
};

// Reads either the long format (header `site_id,year,value`) or a plain
// one-value-per-line file (as written by the simulate command), which becomes
// a single site "series". Lines starting with '#' are comments.
SeriesTable read_series_csv(const std::string& path);
void write_series_csv(const SeriesTable& table, const std::string& path);

// One simulated value per line with a replay header comment.
void write_sample_file(const GevSample& sample, const GevParams& params,
                       std::uint64_t seed, const std::string& path);

// Columnar training records; the header comment names the percentile set.
void write_dataset_csv(const std::vector<TrainingRecord>& records,
                       const PercentileSet& pset, const std::string& path);
struct DatasetFile {
  std::vector<TrainingRecord> records;
  PercentileSet pset;
};
DatasetFile read_dataset_csv(const std::string& path);

// Per-epoch training table.
void write_history_csv(const TrainingHistory& history, const std::string& path);

}  // namespace gevnet
