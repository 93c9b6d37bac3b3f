#pragma once

// Convex-concave machinery for the treating-interference-as-noise rates.
// R_k = r_k1 - r_k2 is a difference of concave log-dets; the surrogate keeps
// r_k1 and replaces r_k2 by its tangent plane at an expansion point, giving a
// concave global minorizer that touches R_k there with matching gradient.

#include "hwigs/network.hpp"

#include <vector>

namespace hwigs {

/// Affine functional Q -> constant + <slope, Q>.
struct AffineBound {
  double constant = 0.0;
  RealMat slope;

  double operator()(const RealMat& q) const { return constant + inner(slope, q); }
};

/// Tangent plane of log2 det at q_ref: an upper bound on log2 det(Q) for all
/// PSD Q, tight at Q = q_ref. Throws NumericalError if q_ref is singular.
AffineBound logdet_majorizer(const RealMat& q_ref);

struct SurrogateState {
  CovarianceSet expansion;
  /// r_k2 evaluated at the expansion point.
  std::vector<double> const_terms;
  /// grads[k][i] = d r_k2 / d P_i at the expansion point; zero for i == k.
  std::vector<Matrices> grads;
  /// sum_i <grads[k][i], P_i^expansion>, folded into the surrogate constant.
  std::vector<double> linear_offset;
};

/// grads[k][i] = 1/(2 ln 2) H_ki^T (C_z,k + sum_{j != k} H_kj P_j H_kj^T)^{-1} H_ki.
SurrogateState build_surrogate(const EffectiveNetwork& e, const CovarianceSet& at);

/// r_k1 = 1/2 log2 det(C_z,k + sum_i H_ki P_i H_ki^T). When `grad` is given it
/// receives d r_k1 / d P_i for every user i.
double concave_part(const EffectiveNetwork& e, const Matrices& p, int k, Matrices* grad = nullptr);

/// r_k2, the same log-det without user k's own signal.
double convex_part(const EffectiveNetwork& e, const Matrices& p, int k, Matrices* grad = nullptr);

/// Exact rate R_k with its gradient (used for checks, not by the optimizers).
double exact_rate(const EffectiveNetwork& e, const Matrices& p, int k, Matrices* grad = nullptr);

/// R~_k(p) = r_k1(p) - r_k2(expansion) - sum_{i != k} <D_ki, P_i - P_i^expansion>.
double surrogate_rate(const SurrogateState& s, const EffectiveNetwork& e, const Matrices& p, int k,
                      Matrices* grad = nullptr);

}  // namespace hwigs
