#pragma once

// Real-composite linear algebra. A complex matrix M maps to the 2N x 2N real
// block form [[Re M, -Im M], [Im M, Re M]]; every optimization in the library
// runs on these real forms.

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace hwigs {

using ComplexMat = Eigen::MatrixXcd;
using RealMat = Eigen::MatrixXd;
using Matrices = std::vector<RealMat>;

inline constexpr double kSymmetryTol = 1e-12;

/// [[Re M, -Im M], [Im M, Re M]].
RealMat realify(const ComplexMat& m);

/// Real composite covariance of a proper complex vector with covariance `c`.
/// With `proper_scale` the result is realify(c) / 2, the covariance of
/// [Re x; Im x]. Throws InvalidArgument when `c` is not Hermitian (1e-10).
RealMat realify_covariance(const ComplexMat& c, bool proper_scale = true);

/// Inverse of realify for matrices with the [[A, -B], [B, A]] pattern.
ComplexMat complexify(const RealMat& m);

/// Euclidean projection of `v` onto {x >= 0, sum(x) <= cap}.
std::vector<double> project_capped_simplex(std::span<const double> v, double cap);

/// Frobenius-nearest symmetric PSD matrix with trace <= trace_cap.
RealMat project_psd_trace(const RealMat& m, double trace_cap);

double symmetry_residual(const RealMat& m);
RealMat symmetrize(const RealMat& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const RealMat& m);

/// Frobenius inner product <a, b> = Tr(a^T b).
inline double inner(const RealMat& a, const RealMat& b) { return (a.array() * b.array()).sum(); }

}  // namespace hwigs
