#include "hwigs/realdec.hpp"

#include "hwigs/errors.hpp"

#include <algorithm>
#include <numeric>

namespace hwigs {

RealMat realify(const ComplexMat& m) {
  const auto r = m.rows();
  const auto c = m.cols();
  RealMat out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = m.real();
  out.topRightCorner(r, c) = -m.imag();
  out.bottomLeftCorner(r, c) = m.imag();
  out.bottomRightCorner(r, c) = m.real();
  return out;
}

RealMat realify_covariance(const ComplexMat& c, bool proper_scale) {
  if (c.rows() != c.cols()) throw InvalidArgument("realify_covariance: matrix is not square");
  if ((c - c.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidArgument("realify_covariance: matrix is not Hermitian");
  }
  RealMat out = realify(c);
  if (proper_scale) out *= 0.5;
  return symmetrize(out);
}

ComplexMat complexify(const RealMat& m) {
  const auto r = m.rows() / 2;
  const auto c = m.cols() / 2;
  ComplexMat out(r, c);
  out.real() = m.topLeftCorner(r, c);
  out.imag() = m.bottomLeftCorner(r, c);
  return out;
}

std::vector<double> project_capped_simplex(std::span<const double> v, double cap) {
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(v[i], 0.0);
    total += out[i];
  }
  if (total <= cap) return out;

  // Water level theta with sum(max(v - theta, 0)) = cap; only positive
  // entries can be active.
  std::vector<double> sorted(out);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - cap) / static_cast<double>(j + 1);
    if (j + 1 == sorted.size() || sorted[j + 1] <= candidate) {
      theta = candidate;
      break;
    }
  }
  for (auto& x : out) x = std::max(x - theta, 0.0);
  return out;
}

RealMat project_psd_trace(const RealMat& m, double trace_cap) {
  if (m.rows() != m.cols()) throw InvalidArgument("project_psd_trace: matrix is not square");
  if (trace_cap < 0.0) throw InvalidArgument("project_psd_trace: negative trace cap");
  const RealMat sym = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<RealMat> eig(sym);
  const auto n = static_cast<std::size_t>(sym.rows());

  // Descending eigenvalue order, ties kept in solver order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ev(a) > ev(b); });

  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = ev(static_cast<Eigen::Index>(order[i]));
  const auto projected = project_capped_simplex(values, trace_cap);

  RealMat out = RealMat::Zero(sym.rows(), sym.cols());
  for (std::size_t i = 0; i < n; ++i) {
    if (projected[i] <= 0.0) continue;
    const auto col = eig.eigenvectors().col(static_cast<Eigen::Index>(order[i]));
    out.noalias() += projected[i] * col * col.transpose();
  }
  return symmetrize(out);
}

double symmetry_residual(const RealMat& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

RealMat symmetrize(const RealMat& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const RealMat& m) {
  Eigen::SelfAdjointEigenSolver<RealMat> eig(symmetrize(m), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace hwigs
