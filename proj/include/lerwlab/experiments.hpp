// Desk-scale experiment drivers: the three capacity laws of large numbers,
// growth-exponent estimation, the sausage hitting profile, and ergodic
// averages. Every run is reproducible bit-for-bit from (config, seed).
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lerwlab/rng.hpp"

#include "json.hpp"

namespace lerwlab {

struct ExperimentConfig {
  std::string id;          // capacity_density_highdim | capacity_density_d4 |
                           // growth_exponent_d3 | capacity_limit_law_d3 |
                           // hitting_profile_d3 | cylinder_ergodicity
  int d = 3;
  std::vector<std::int64_t> ladder;  // strictly increasing rung sizes
  std::int64_t samples = 1;          // replicates per rung
  std::uint64_t master_seed = 1;
  int threads = 0;
  std::string out_dir;               // empty = no files, report only
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const;
  void validate() const;

  // Flat "key = value" text file; lists are comma separated. Keys: id, d,
  // ladder, samples, seed, out_dir, plus free-form numeric parameters.
  static ExperimentConfig load(const std::string& path);
  std::string to_text() const;
  nlohmann::json to_json() const;
};

// One replicate row; written as one CSV line each so every estimate carries
// its provenance.
struct ReplicateRow {
  std::string experiment;
  std::int64_t rung = 0;
  std::int64_t replicate = 0;
  double estimate = 0;
  double stderr_value = 0;
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  double wall_seconds = 0;
  std::map<std::string, double> extra;  // experiment-specific columns

  static std::string csv_header(const std::vector<std::string>& extra_keys);
  std::string csv_row(const std::vector<std::string>& extra_keys) const;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReplicateRow> rows;
  nlohmann::json summary;

  // Writes <id>_replicates.csv, <id>_summary.json and <id>_plot_*.dat under
  // config.out_dir (no-op when out_dir is empty).
  void write_outputs() const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

// Individual drivers (run_experiment dispatches on config.id).
ExperimentReport capacity_density_highdim(const ExperimentConfig& config);
ExperimentReport capacity_density_d4(const ExperimentConfig& config);
ExperimentReport growth_exponent_d3(const ExperimentConfig& config);
ExperimentReport capacity_limit_law_d3(const ExperimentConfig& config);
ExperimentReport hitting_profile_d3(const ExperimentConfig& config);
ExperimentReport cylinder_ergodicity(const ExperimentConfig& config);

}  // namespace lerwlab
