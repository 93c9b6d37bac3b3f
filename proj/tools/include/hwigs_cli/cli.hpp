#pragma once

#include "hwigs/montecarlo.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace hwigs::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitConfig = 65;

/// Test seams for the verify subcommand.
struct VerifyHooks {
  /// Applied to every analytic gradient before it is compared with finite
  /// differences.
  std::function<void(Matrices&)> tamper_gradient;
};

/// Runs the command line; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const VerifyHooks& hooks = {});

/// Sweep presets named after the experiment figures.
std::vector<std::string> preset_names();
std::optional<SweepConfig> preset(std::string_view name);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite behind `hwigs verify`.
std::vector<VerifyCheck> run_verify(const VerifyHooks& hooks = {});

/// Random feasible covariances: PSD (proper-structured in PGS mode) with trace
/// uniform in (0, budget].
CovarianceSet random_feasible(const EffectiveNetwork& e, Signaling mode, std::mt19937_64& rng);

}  // namespace hwigs::cli
