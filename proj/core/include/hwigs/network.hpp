#pragma once

// K-user MIMO interference channel with hardware impairments: scenario
// description, precomputed effective links and noise covariances, and rate /
// energy-efficiency evaluation for a set of transmit covariances.

#include "hwigs/hwi.hpp"
#include "hwigs/realdec.hpp"

#include <cstdint>
#include <vector>

namespace hwigs {

enum class Signaling { IGS, PGS };

/// Knobs for drawing a scenario. Budgets follow SNR = P / sigma_R^2.
struct ScenarioParams {
  int users = 2;
  int n_tx = 1;
  int n_rx = 1;
  double snr_db = 10.0;
  double a_tx = 0.6;
  double a_rx = 0.6;
  double phase_deg = 5.0;  // both sides
  double sigma2_tx = 0.2;
  double sigma2_rx = 1.0;
  double eta = 1.0;
  double p_static = 1.0;

  double power_budget() const;
};

struct NetworkScenario {
  std::uint64_t seed = 0;
  int users = 0;
  int n_tx = 0;
  int n_rx = 0;
  /// channels[k][i]: n_rx x n_tx link from transmitter i to receiver k.
  std::vector<std::vector<ComplexMat>> channels;
  ImbalanceParams tx_imb;
  ImbalanceParams rx_imb;
  DistortionParams distortion;
  std::vector<double> power_budget;
  std::vector<double> eta;
  std::vector<double> p_static;

  /// Throws InvalidArgument on shape or range violations, including
  /// sigma2_rx <= 0 (degenerate noise covariance).
  void validate() const;
};

/// Channel entries are i.i.d. CN(0, 1), drawn as two N(0, 1/2) reals from a
/// seeded mt19937_64 (Box-Muller on 53-bit uniforms, so streams do not
/// depend on the standard library's distribution implementations).
NetworkScenario draw_scenario(const ScenarioParams& params, std::uint64_t seed);

/// Same scenario with the I/Q imbalance on both sides replaced by the ideal
/// model; distortion noise is kept.
NetworkScenario without_imbalance(const NetworkScenario& s);

struct EffectiveNetwork {
  int users = 0;
  int n_tx = 0;
  int n_rx = 0;
  std::vector<std::vector<HwiLinkModel>> links;
  std::vector<RealMat> noise_cov;
  std::vector<double> power_budget;
  std::vector<double> eta;
  std::vector<double> p_static;

  const RealMat& h(int k, int i) const {
    return links[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)].h_tilde;
  }
  /// eta_k Tr(P_k) + P_c,k
  double consumption(int k, const RealMat& p) const;
};

/// links[k][i] = effective_link(H_ki); noise_cov[k] = Gamma (sum_i H_ki C_T H_ki^T + C_R) Gamma^T
/// in real composite form.
EffectiveNetwork build_effective(const NetworkScenario& s);

struct CovarianceSet {
  Signaling mode = Signaling::IGS;
  Matrices mats;

  /// Every user gets `per_dim` * I of dimension 2 n_tx.
  static CovarianceSet uniform(int users, int n_tx, double per_dim, Signaling mode);
};

struct RateReport {
  std::vector<double> rate;      // R_k = r1_k - r2_k, bits / channel use
  std::vector<double> r1;        // concave part
  std::vector<double> r2;        // convex part (interference + noise)
  std::vector<double> power;     // Tr(P_k)
  std::vector<double> ee;        // R_k / (eta_k Tr P_k + P_c,k)
  double sum_rate = 0.0;
  double min_rate = 0.0;
  double total_consumption = 0.0;
  double global_ee = 0.0;
};

RateReport rates(const EffectiveNetwork& e, const CovarianceSet& p);

/// Cholesky factor of a symmetric positive definite matrix with the
/// conditioning estimate (max L_ii / min L_ii)^2 checked against 1e12.
struct SpdFactor {
  Eigen::LLT<RealMat> llt;
  double log2det = 0.0;
};
inline constexpr double kMaxCondition = 1e12;
SpdFactor factor_spd(const RealMat& m, const char* what);

/// C_z,k + sum_{i in users} H_ki P_i H_ki^T, optionally skipping user `skip`.
RealMat received_covariance(const EffectiveNetwork& e, const Matrices& p, int k, int skip = -1);

}  // namespace hwigs
