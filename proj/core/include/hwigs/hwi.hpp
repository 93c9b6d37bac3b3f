#pragma once

// I/Q imbalance and additive distortion model for one MIMO link. The
// transmitter applies x -> V1 x + V2 x*, the receiver y -> G1 y + G2 y*, and
// the composite link becomes the widely linear map y = H1bar x + H2bar x* + z.

#include "hwigs/realdec.hpp"

#include <vector>

namespace hwigs {

/// Amplitude and phase imbalance per branch. A single entry is replicated
/// across all antennas; otherwise there is one entry per antenna.
struct ImbalanceParams {
  std::vector<double> amplitude{1.0};
  std::vector<double> phase{0.0};  // radians

  static ImbalanceParams uniform(double amplitude, double phase_rad);
  static ImbalanceParams ideal() { return {}; }

  bool is_ideal() const;
  /// Throws InvalidArgument for non-positive amplitudes or when the vector
  /// length is neither 1 nor n.
  void validate(Eigen::Index n) const;
};

/// Transmit distortion variance sigma_T^2 and aggregate receive noise sigma_R^2.
struct DistortionParams {
  double sigma2_tx = 0.2;
  double sigma2_rx = 1.0;
};

/// The pair (V1, V2) or (G1, G2); both diagonal.
struct ImbalancePair {
  ComplexMat first;
  ComplexMat second;
};

/// V1 = (I + A e^{j theta}) / 2, V2 = I - conj(V1).
ImbalancePair build_tx_imbalance(const ImbalanceParams& p, Eigen::Index n);
/// Same construction at the receiver: G1, G2 = I - conj(G1).
ImbalancePair build_rx_imbalance(const ImbalanceParams& p, Eigen::Index n);

/// Real composite of z -> M1 z + M2 z*:
/// [[Re(M1 + M2), -Im(M1 - M2)], [Im(M1 + M2), Re(M1 - M2)]].
RealMat widely_linear_real(const ComplexMat& m1, const ComplexMat& m2);

struct HwiLinkModel {
  ComplexMat h1bar;
  ComplexMat h2bar;
  RealMat h_tilde;  // real composite of the widely linear link
  RealMat h_real;   // realify(H), impairment free
};

/// H1bar = G1 H V1 + G2 H* V2*, H2bar = G1 H V2 + G2 H* V1*.
HwiLinkModel effective_link(const ComplexMat& h, const ImbalanceParams& tx, const ImbalanceParams& rx);

/// Real composite of the receive-side imbalance map applied to the
/// aggregate noise, widely_linear_real(G1, G2).
RealMat gamma_real(const ImbalanceParams& rx, Eigen::Index n);

}  // namespace hwigs
