#pragma once

// Outer optimizers. Each runs a majorization-minimization loop: build the
// concave rate surrogate at the current point, solve the surrogate problem,
// repeat. The exact objective is non-decreasing along the MM iterates.
// Energy-efficiency problems solve each surrogate problem with a
// (generalized) Dinkelbach loop.

#include "hwigs/network.hpp"
#include "hwigs/solver.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hwigs {

enum class ProblemKind { RateRegion, SumRate, EERegion, GlobalEE };
enum class DesignMode { IGS, PGS, IdealPGS };

std::string_view to_string(ProblemKind kind);
std::string_view to_string(DesignMode mode);
ProblemKind parse_problem_kind(std::string_view text);
DesignMode parse_design_mode(std::string_view text);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::RateRegion;
  /// Rate-profile / EE-profile weights. Empty means 1/K for every user.
  std::vector<double> alphas;
  /// Per-user QoS thresholds (bits / channel use). Empty means none.
  std::vector<double> r_th;
  DesignMode mode = DesignMode::PGS;

  /// Weights normalized to sum 1, or 1/K when unset. Throws InvalidArgument
  /// on negative or all-zero weights or a length mismatch.
  std::vector<double> weights(int users) const;
  std::vector<double> thresholds(int users) const;
  bool has_qos() const;
};

struct MMOptions {
  int max_outer = 40;
  double outer_tol = 1e-5;   ///< relative change of the exact objective
  int max_inner = 30;        ///< GDA / Dinkelbach iterations per MM step
  double inner_tol = 1e-6;   ///< GDA / Dinkelbach residual
  /// Softmin start temperature for warm-started subproblems (every MM step
  /// after the first, every GDA step after the first).
  double warm_tau_init = 1e-2;
  SolveOptions solver;
};

struct OptimizeTrace {
  /// Exact objective at the start point and after every MM iteration.
  std::vector<double> objective;
  /// Dinkelbach / GDA parameters per MM iteration (empty for rate problems).
  std::vector<std::vector<double>> mu;
  /// Final Dinkelbach / GDA residual per MM iteration.
  std::vector<double> inner_residual;
  RateReport final_report;
  bool converged = false;
  bool inner_converged = true;
  bool qos_precheck_used = false;
  long solver_iterations = 0;
};

struct Solution {
  CovarianceSet point;
  double objective = 0.0;
  OptimizeTrace trace;
};

/// min_k R_k / a_k, sum R_k, min_k E_k / a_k or global EE, depending on kind.
double exact_objective(const ProblemSpec& spec, const EffectiveNetwork& e, const RateReport& report);

/// Uniform start used by the experiments: P / (2 N_T) I for rate problems and
/// 0.3 P / (2 N_T) I for energy-efficiency problems.
CovarianceSet default_start(const EffectiveNetwork& e, ProblemKind kind, Signaling set);

Signaling feasible_set(DesignMode mode);

Solution solve_rate_region(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
                           std::optional<CovarianceSet> start = std::nullopt);
Solution solve_sum_rate(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
                        std::optional<CovarianceSet> start = std::nullopt);
Solution solve_ee_region(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
                         std::optional<CovarianceSet> start = std::nullopt);
Solution solve_global_ee(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
                         std::optional<CovarianceSet> start = std::nullopt);

/// Dispatch on spec.kind.
Solution solve(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
               std::optional<CovarianceSet> start = std::nullopt);

struct ModeOutcome {
  DesignMode mode = DesignMode::PGS;
  Solution solution;     ///< as optimized (on the ideal network for IdealPGS)
  RateReport report;     ///< evaluated on the true impaired network
  double objective = 0.0;
  double runtime_ms = 0.0;
};

/// Solves in spec.mode. PGS starts from default_start; IGS starts from
/// `warm_start` when given (normally the PGS solution), else from a fresh PGS
/// solve; IdealPGS designs on the imbalance-free network and is evaluated on
/// the true one.
ModeOutcome run_mode(const NetworkScenario& scenario, const EffectiveNetwork& network, const ProblemSpec& spec,
                     const MMOptions& opts, const CovarianceSet* warm_start = nullptr);

struct ModeComparison {
  ModeOutcome pgs;
  ModeOutcome igs;
  ModeOutcome ideal_pgs;
};

/// PGS, then IGS warm-started from it, then I-PGS, on one scenario.
ModeComparison run_all_modes(const NetworkScenario& scenario, const ProblemSpec& spec, const MMOptions& opts);

}  // namespace hwigs
