#include "hwigs/surrogate.hpp"

#include "hwigs/errors.hpp"

#include <numbers>

namespace hwigs {
namespace {

constexpr double kHalfInvLn2 = 0.5 / std::numbers::ln2;

// 1/2 log2 det(C_z,k + sum_{i != skip} H_ki P_i H_ki^T) and its gradients.
double half_logdet_part(const EffectiveNetwork& e, const Matrices& p, int k, int skip, Matrices* grad) {
  const RealMat s = received_covariance(e, p, k, skip);
  const SpdFactor f = factor_spd(s, "rate log-det");
  if (grad != nullptr) {
    grad->resize(static_cast<std::size_t>(e.users));
    const auto lower = f.llt.matrixL();
    RealMat w;
    for (int i = 0; i < e.users; ++i) {
      auto& g = (*grad)[static_cast<std::size_t>(i)];
      const RealMat& h = e.h(k, i);
      if (i == skip) {
        g.setZero(h.cols(), h.cols());
        continue;
      }
      // H^T S^-1 H = W^T W with W = L^-1 H, mirrored so it is exactly symmetric.
      w = lower.solve(h);
      g.noalias() = kHalfInvLn2 * w.transpose().lazyProduct(w);
      g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    }
  }
  return 0.5 * f.log2det;
}

}  // namespace

AffineBound logdet_majorizer(const RealMat& q_ref) {
  const SpdFactor f = factor_spd(q_ref, "logdet_majorizer");
  AffineBound b;
  const auto n = q_ref.rows();
  b.slope = symmetrize(f.llt.solve(RealMat::Identity(n, n))) / std::numbers::ln2;
  b.constant = f.log2det - static_cast<double>(n) / std::numbers::ln2;
  return b;
}

double concave_part(const EffectiveNetwork& e, const Matrices& p, int k, Matrices* grad) {
  return half_logdet_part(e, p, k, -1, grad);
}

double convex_part(const EffectiveNetwork& e, const Matrices& p, int k, Matrices* grad) {
  return half_logdet_part(e, p, k, k, grad);
}

double exact_rate(const EffectiveNetwork& e, const Matrices& p, int k, Matrices* grad) {
  if (grad == nullptr) return concave_part(e, p, k) - convex_part(e, p, k);
  Matrices g2;
  const double value = concave_part(e, p, k, grad) - convex_part(e, p, k, &g2);
  for (std::size_t i = 0; i < grad->size(); ++i) (*grad)[i] -= g2[i];
  return value;
}

SurrogateState build_surrogate(const EffectiveNetwork& e, const CovarianceSet& at) {
  if (at.mats.size() != static_cast<std::size_t>(e.users)) {
    throw InvalidArgument("build_surrogate: expected one covariance per user");
  }
  SurrogateState s;
  s.expansion = at;
  const auto k_count = static_cast<std::size_t>(e.users);
  s.const_terms.resize(k_count);
  s.grads.resize(k_count);
  s.linear_offset.assign(k_count, 0.0);
  for (int k = 0; k < e.users; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    s.const_terms[kk] = convex_part(e, at.mats, k, &s.grads[kk]);
    for (std::size_t i = 0; i < k_count; ++i) s.linear_offset[kk] += inner(s.grads[kk][i], at.mats[i]);
  }
  return s;
}

double surrogate_rate(const SurrogateState& s, const EffectiveNetwork& e, const Matrices& p, int k, Matrices* grad) {
  const auto kk = static_cast<std::size_t>(k);
  double value = concave_part(e, p, k, grad) - s.const_terms[kk] + s.linear_offset[kk];
  const auto& d = s.grads[kk];
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (static_cast<int>(i) == k) continue;
    value -= inner(d[i], p[i]);
    if (grad != nullptr) (*grad)[i] -= d[i];
  }
  return value;
}

}  // namespace hwigs
