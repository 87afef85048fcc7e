#pragma once

#include "mqskew/config.hpp"
#include "mqskew/qinfo.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mqskew {

inline constexpr const char* kCsvFormatVersion = "mqskew-csv/1";

struct ResultRow {
  EngineKind engine = EngineKind::dense;
  int n_spins = 0;
  double beta = 0.0;
  double tau = 0.0;
  std::vector<double> intensities;  // J_n for n = -N..N
  double m2 = 0.0;
  double m2_half_beta = 0.0;
  double wy = 0.0;
  double fisher = 0.0;
  double fisher_lb = 0.0;
  int depth_wy = 1;
  int depth_fisher = 1;
  double wall_seconds = 0.0;

  double intensity(int order) const { return intensities.at(static_cast<std::size_t>(order + n_spins)); }
};

ResultRow make_row(const DepthReport& report, double wall_seconds);

struct SweepSummary {
  std::size_t rows = 0;
  int min_depth_wy = 0;
  int max_depth_wy = 0;
  int min_depth_fisher = 0;
  int max_depth_fisher = 0;
  // Rows where 2 M_2 exceeded I_F.
  std::size_t fisher_bound_exceeded = 0;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  SweepSummary summary;
};

struct SweepOptions {
  // 0 = all hardware threads.
  unsigned threads = 0;
};

// One row per (beta, tau) with beta outer and tau inner, or one row per
// beta at the tau maximizing I_F in max-over-grid mode. Any engine error or
// invariant violation aborts the sweep with the grid point named.
SweepResult run_sweep(const RunConfig& config, const SweepOptions& options = {});

struct WriteOptions {
  bool timestamp = true;
};

// Fixed column order: engine, N, beta, tau, M2, M2_half_beta, I_WY, I_F,
// fisher_lb, depth_wy, depth_fisher, J_0, J_2, ... (groups not requested in
// the config are dropped; the remaining order is unchanged).
void write_csv(std::ostream& out, const RunConfig& config, const SweepResult& result, const WriteOptions& options);
void write_json(std::ostream& out, const RunConfig& config, const SweepResult& result, const WriteOptions& options);
void write_summary(std::ostream& out, const RunConfig& config, const SweepResult& result);

// Shortest round-trip decimal form.
std::string format_number(double value);

}  // namespace mqskew
