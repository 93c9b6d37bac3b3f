#include "hwigs_cli/cli.hpp"

namespace hwigs::cli {
namespace {

SweepConfig base(ProblemKind kind, SweepAxis axis, std::vector<double> values) {
  SweepConfig cfg;
  cfg.problem.kind = kind;
  cfg.axis = axis;
  cfg.values = std::move(values);
  return cfg;
}

SweepConfig mimo_2x2(ProblemKind kind, SweepAxis axis, std::vector<double> values, int users, double snr_db) {
  SweepConfig cfg = base(kind, axis, std::move(values));
  cfg.scenario.users = users;
  cfg.scenario.n_tx = 2;
  cfg.scenario.n_rx = 2;
  cfg.scenario.snr_db = snr_db;
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7", "fig9"}; }

std::optional<SweepConfig> preset(std::string_view name) {
  const std::vector<double> snr = {0.0, 10.0, 20.0, 30.0};
  const std::vector<double> users = {2.0, 4.0, 6.0, 8.0, 10.0};
  const std::vector<double> p_static = {1.0, 2.0, 5.0, 10.0};
  if (name == "fig3a") {
    // 2-user SISO fairness rate versus SNR.
    return base(ProblemKind::RateRegion, SweepAxis::SnrDb, snr);
  }
  if (name == "fig3b") {
    // 2-user MISO, four transmit antennas.
    SweepConfig cfg = base(ProblemKind::RateRegion, SweepAxis::SnrDb, snr);
    cfg.scenario.n_tx = 4;
    return cfg;
  }
  if (name == "fig4") {
    // Fairness rate versus imbalance level 1 - a_T at 0 dB.
    return mimo_2x2(ProblemKind::RateRegion, SweepAxis::Imbalance, {0.0, 0.1, 0.2, 0.3, 0.4}, 2, 0.0);
  }
  if (name == "fig5") return mimo_2x2(ProblemKind::RateRegion, SweepAxis::Users, users, 2, 10.0);
  if (name == "fig6") return mimo_2x2(ProblemKind::SumRate, SweepAxis::Users, users, 2, 10.0);
  if (name == "fig7") return mimo_2x2(ProblemKind::EERegion, SweepAxis::PStatic, p_static, 6, 10.0);
  if (name == "fig9") return mimo_2x2(ProblemKind::GlobalEE, SweepAxis::PStatic, p_static, 6, 10.0);
  return std::nullopt;
}

}  // namespace hwigs::cli
