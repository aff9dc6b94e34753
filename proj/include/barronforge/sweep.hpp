#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "barronforge/constructor.hpp"
#include "barronforge/metrics.hpp"
#include "barronforge/network.hpp"

namespace barronforge {

/// Resolved parameters of a convergence sweep over (d, m, seed) cells.
struct SweepConfig {
  Variant variant = Variant::L2;
  std::vector<int> dims{4};
  std::vector<int> ms{16, 64, 256};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int n_modes = 64;
  double log_exponent = 3.0;
  /// Seed of the synthetic target; one target per dimension, shared by all
  /// cells of that dimension.
  std::uint64_t target_seed = 0;
  int quad_points = 4096;
  int max_retries = 16;
  double error_slack = 1.0;
  /// 0 picks the hardware concurrency.
  int workers = 0;

  void validate() const;
};

nlohmann::json sweep_config_to_json(const SweepConfig& config);
/// Fields absent from `doc` keep the values already in `config`.
void merge_sweep_config(SweepConfig& config, const nlohmann::json& doc);

struct SweepRow {
  int d = 0;
  int m = 0;
  std::uint64_t seed = 0;
  Variant variant = Variant::L2;
  double error = 0.0;
  double std_err = 0.0;
  double error_bound = 0.0;
  int total_depth = 0;
  double depth_bound = 0.0;
  int retries = 0;
  bool accepted = false;
  double c_factor = 1.0;
};

struct SweepSummary {
  int d = 0;
  SlopeFit fit;
  /// Median error per m, in the order of the config's ms.
  std::vector<std::pair<int, double>> medians;
};

/// Quadrature used for a cell: a midpoint grid for d <= 3, Monte Carlo
/// otherwise.
QuadratureSpec sweep_quadrature(int d, int n_points, std::uint64_t seed);

/// Synthetic target shared by every cell of dimension d.
SpectralTarget sweep_target(const SweepConfig& config, int d);

/// Build configuration of cell (d, m, seed); seeds come from a substream keyed
/// by (seed, d, m).
BuildConfig sweep_cell_config(const SweepConfig& config, int d, int m, std::uint64_t seed);

/// Runs every cell on a bounded worker pool. Rows do not depend on
/// scheduling and come back sorted by (d, m, seed).
std::vector<SweepRow> run_sweep(const SweepConfig& config);

/// Log-log fit of the per-m median error for each dimension. Medians use all
/// rows of a cell group, accepted or not.
std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRow>& rows);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string summary_csv(const std::vector<SweepSummary>& summaries);
/// Log-error vs log-m polyline plot with one series per dimension.
std::string sweep_svg(const std::vector<SweepSummary>& summaries);

/// %.12g formatting used by every CSV writer.
std::string csv_number(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace barronforge
