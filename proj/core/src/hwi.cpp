#include "hwigs/hwi.hpp"

#include "hwigs/errors.hpp"

#include <complex>
#include <string>

namespace hwigs {
namespace {

ImbalancePair build_imbalance(const ImbalanceParams& p, Eigen::Index n) {
  p.validate(n);
  ImbalancePair out{ComplexMat::Zero(n, n), ComplexMat::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = p.amplitude.size() == 1 ? 0 : static_cast<std::size_t>(i);
    const std::complex<double> rot = std::polar(p.amplitude[idx], p.phase[idx]);
    out.first(i, i) = 0.5 * (1.0 + rot);
    out.second(i, i) = 1.0 - std::conj(out.first(i, i));
  }
  return out;
}

}  // namespace

ImbalanceParams ImbalanceParams::uniform(double amplitude, double phase_rad) {
  return ImbalanceParams{{amplitude}, {phase_rad}};
}

bool ImbalanceParams::is_ideal() const {
  for (double a : amplitude) {
    if (a != 1.0) return false;
  }
  for (double t : phase) {
    if (t != 0.0) return false;
  }
  return true;
}

void ImbalanceParams::validate(Eigen::Index n) const {
  if (amplitude.size() != phase.size()) {
    throw InvalidArgument("imbalance: amplitude and phase vectors differ in length");
  }
  if (amplitude.size() != 1 && static_cast<Eigen::Index>(amplitude.size()) != n) {
    throw InvalidArgument("imbalance: expected 1 or " + std::to_string(n) + " entries, got " +
                          std::to_string(amplitude.size()));
  }
  for (double a : amplitude) {
    if (!(a > 0.0)) throw InvalidArgument("imbalance: amplitude must be positive");
  }
}

ImbalancePair build_tx_imbalance(const ImbalanceParams& p, Eigen::Index n) { return build_imbalance(p, n); }

ImbalancePair build_rx_imbalance(const ImbalanceParams& p, Eigen::Index n) { return build_imbalance(p, n); }

RealMat widely_linear_real(const ComplexMat& m1, const ComplexMat& m2) {
  if (m1.rows() != m2.rows() || m1.cols() != m2.cols()) {
    throw InvalidArgument("widely_linear_real: dimension mismatch");
  }
  const auto r = m1.rows();
  const auto c = m1.cols();
  const ComplexMat sum = m1 + m2;
  const ComplexMat diff = m1 - m2;
  RealMat out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = sum.real();
  out.topRightCorner(r, c) = -diff.imag();
  out.bottomLeftCorner(r, c) = sum.imag();
  out.bottomRightCorner(r, c) = diff.real();
  return out;
}

HwiLinkModel effective_link(const ComplexMat& h, const ImbalanceParams& tx, const ImbalanceParams& rx) {
  const auto [v1, v2] = build_tx_imbalance(tx, h.cols());
  const auto [g1, g2] = build_rx_imbalance(rx, h.rows());
  const ComplexMat hc = h.conjugate();
  HwiLinkModel link;
  link.h1bar = g1 * h * v1 + g2 * hc * v2.conjugate();
  link.h2bar = g1 * h * v2 + g2 * hc * v1.conjugate();
  link.h_tilde = widely_linear_real(link.h1bar, link.h2bar);
  link.h_real = realify(h);
  return link;
}

RealMat gamma_real(const ImbalanceParams& rx, Eigen::Index n) {
  const auto [g1, g2] = build_rx_imbalance(rx, n);
  return widely_linear_real(g1, g2);
}

}  // namespace hwigs
