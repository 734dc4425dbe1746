#include "gevnet/series_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace gevnet {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw ParseError("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return static_cast<int>(v);
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

std::map<std::string, std::vector<double>> SeriesTable::by_site() const {
  std::map<std::string, std::vector<double>> out;
  for (const auto& r : records) out[r.site_id].push_back(r.value);
  return out;
}

SeriesTable read_series_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  SeriesTable table;
  std::set<std::pair<std::string, int>> seen;
  std::string line;
  std::size_t line_no = 0;
  bool long_format = false;
  bool format_known = false;
  int synthetic_year = 0;

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (!format_known) {
      format_known = true;
      if (line == "site_id,year,value") {
        long_format = true;
        continue;
      }
      if (line.find(',') != std::string::npos) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected header 'site_id,year,value' or one value per line");
      }
    }
    if (long_format) {
      const auto fields = split(line, ',');
      if (fields.size() != 3) {
        throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields");
      }
      SeriesRecord r{fields[0], parse_int(fields[1], line_no),
                     parse_double(fields[2], line_no)};
      if (!std::isfinite(r.value)) {
        throw ParseError("line " + std::to_string(line_no) + ": non-finite value");
      }
      if (!seen.insert({r.site_id, r.year}).second) {
        throw ParseError("line " + std::to_string(line_no) + ": duplicate (site, year) " +
                         r.site_id + "," + std::to_string(r.year));
      }
      table.records.push_back(std::move(r));
    } else {
      const double v = parse_double(line, line_no);
      if (!std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line_no) + ": non-finite value");
      }
      table.records.push_back(SeriesRecord{"series", synthetic_year++, v});
    }
  }
  if (table.records.empty()) throw ParseError("no data rows in " + path);
  return table;
}

void write_series_csv(const SeriesTable& table, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "site_id,year,value\n";
  for (const auto& r : table.records) {
    out << r.site_id << "," << r.year << "," << r.value << "\n";
  }
}

void write_sample_file(const GevSample& sample, const GevParams& params,
                       std::uint64_t seed, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "# gev sample mu=" << params.mu << " sigma=" << params.sigma
      << " xi=" << params.xi << " n=" << sample.n() << " seed=" << seed << "\n";
  for (double v : sample.values) out << v << "\n";
}

void write_dataset_csv(const std::vector<TrainingRecord>& records,
                       const PercentileSet& pset, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "# percentiles:";
  for (double p : pset.probs) out << " " << p;
  out << "\n";
  for (std::size_t i = 1; i <= kNumPercentiles; ++i) out << "p" << i << ",";
  out << "sample_min,sample_max,info_mean,info_iqr,"
         "target_mu,target_sigma,target_xi,sample_size\n";
  for (const auto& r : records) {
    for (double p : r.summary.percentiles) out << p << ",";
    out << r.summary.sample_min << "," << r.summary.sample_max << ","
        << r.summary.info.mean << "," << r.summary.info.iqr << "," << r.target_std.mu
        << "," << r.target_std.sigma << "," << r.target_std.xi << "," << r.sample_size
        << "\n";
  }
}

DatasetFile read_dataset_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  DatasetFile out;
  std::string line;
  std::size_t line_no = 0;
  bool have_pset = false;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line.rfind("# percentiles:", 0) == 0) {
      std::istringstream ss(line.substr(14));
      for (std::size_t i = 0; i < kNumPercentiles; ++i) {
        if (!(ss >> out.pset.probs[i])) {
          throw ParseError("malformed percentile header in " + path);
        }
      }
      have_pset = true;
      continue;
    }
    if (line[0] == '#') continue;
    if (!have_header) {
      have_header = true;  // column header row
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != kNumPercentiles + 8) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(kNumPercentiles + 8) + " fields");
    }
    TrainingRecord rec;
    std::size_t f = 0;
    for (std::size_t i = 0; i < kNumPercentiles; ++i) {
      rec.summary.percentiles[i] = parse_double(fields[f++], line_no);
    }
    rec.summary.sample_min = parse_double(fields[f++], line_no);
    rec.summary.sample_max = parse_double(fields[f++], line_no);
    rec.summary.info.mean = parse_double(fields[f++], line_no);
    rec.summary.info.iqr = parse_double(fields[f++], line_no);
    const double tmu = parse_double(fields[f++], line_no);
    const double tsig = parse_double(fields[f++], line_no);
    const double txi = parse_double(fields[f++], line_no);
    rec.target_std = GevParams::unchecked(tmu, tsig, txi);
    rec.sample_size = static_cast<std::size_t>(parse_int(fields[f++], line_no));
    rec.summary.n = rec.sample_size;
    out.records.push_back(std::move(rec));
  }
  if (!have_pset) throw ParseError("dataset file lacks the percentile header: " + path);
  return out;
}

void write_history_csv(const TrainingHistory& history, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "epoch,train_loss,valid_loss,learning_rate,is_best\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << "," << e.train_loss << "," << e.valid_loss << "," << e.learning_rate
        << "," << (e.epoch == history.best_epoch ? 1 : 0) << "\n";
  }
}

}  // namespace gevnet
