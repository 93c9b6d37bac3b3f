#pragma once

// Monte Carlo sweeps: for every axis value and realization draw a scenario,
// solve it with PGS, IGS (warm-started from PGS) and I-PGS, and aggregate the
// paired results. Output is independent of the thread count.

#include "hwigs/problems.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hwigs {

enum class SweepAxis { SnrDb, Users, Imbalance, PStatic };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view text);
/// Only the users axis changes the channel dimensions; every other axis
/// reuses the same channel draws across its values.
bool axis_changes_channel(SweepAxis axis);

struct SweepConfig {
  /// Kind, weights and thresholds. A single alpha / r_th entry is replicated
  /// across users; empty alphas means 1/K. The mode field is ignored.
  ProblemSpec problem;
  SweepAxis axis = SweepAxis::SnrDb;
  std::vector<double> values;
  int realizations = 20;
  std::uint64_t base_seed = 1;
  ScenarioParams scenario;
  MMOptions mm;
  int threads = 1;
  /// Runtime is wall-clock and therefore not reproducible; it is written as
  /// NA unless requested.
  bool record_runtime = false;

  void validate() const;
};

/// Scenario parameters at one point of the sweep axis. The imbalance axis
/// value v sets a_T = a_R = 1 - v.
ScenarioParams scenario_at(const SweepConfig& cfg, double axis_value);
/// Problem spec with per-user vectors sized for `users`.
ProblemSpec problem_for(const SweepConfig& cfg, int users);

std::uint64_t realization_seed(std::uint64_t base_seed, std::size_t axis_index, int realization, bool channel_varies);

struct ModeMetrics {
  double objective = 0.0;
  double min_rate = 0.0;
  double sum_rate = 0.0;
  double min_ee = 0.0;
  double global_ee = 0.0;
  std::vector<double> rates;
  double runtime_ms = 0.0;
};

inline constexpr std::size_t kModeCount = 3;
inline constexpr DesignMode kSweepModes[kModeCount] = {DesignMode::PGS, DesignMode::IGS, DesignMode::IdealPGS};

struct RealizationRecord {
  std::size_t axis_index = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  ModeMetrics modes[kModeCount];
};

struct ResultRow {
  std::string axis_name;
  double axis_value = 0.0;
  std::string mode;
  std::string metric;
  double mean = 0.0;
  double std_error = 0.0;
  int n_realizations = 0;
  double runtime_ms = 0.0;  ///< NaN when not recorded
};

struct SweepResult {
  std::vector<RealizationRecord> records;  ///< ordered by (axis index, realization)
  std::vector<ResultRow> rows;             ///< per-mode metrics followed by relative gains
  int failures = 0;
};

SweepResult run_sweep(const SweepConfig& cfg);

struct GainEstimate {
  double percent = 0.0;
  double std_error = 0.0;
  bool defined = false;
};

/// 100 (mean(treated) - mean(baseline)) / mean(baseline) over paired samples,
/// with the ratio-estimator standard error. Undefined when mean(baseline) == 0.
GainEstimate relative_gain(std::span<const double> treated, std::span<const double> baseline);

/// Gain rows for IGS over PGS and over I-PGS, per axis value and metric.
std::vector<ResultRow> relative_gain_rows(const SweepConfig& cfg, const std::vector<RealizationRecord>& records);

/// axis_name,axis_value,mode,metric_name,mean,stderr,n_realizations,runtime_ms
/// with %.17g numbers and NA for missing values.
std::string to_csv(const std::vector<ResultRow>& rows);

/// Versioned JSON sweep configuration (same conventions as the scenario
/// format). Throws InvalidArgument naming the offending field or position.
SweepConfig parse_sweep_config(std::string_view text);
std::string dump_sweep_config(const SweepConfig& cfg);

/// Config echo plus version, timestamp, failure count and pairing notes.
std::string sweep_manifest(const SweepConfig& cfg, const SweepResult& result, std::string_view timestamp);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace hwigs
