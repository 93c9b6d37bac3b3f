#pragma once

// First-order solvers for the convex surrogate subproblems. Variables are the
// K real composite covariances; the feasible set is {P_k PSD, Tr P_k <= P_k}
// for improper signaling, intersected with the proper pattern
// [[A, -B], [B, A]] (A symmetric, B skew) for proper signaling.

#include "hwigs/network.hpp"

#include <functional>
#include <span>
#include <vector>

namespace hwigs {

struct FeasibleSetSpec {
  Signaling mode = Signaling::IGS;
  std::vector<double> budgets;
  int n_tx = 1;
};

struct SolveOptions {
  int max_iters = 200;           ///< per ascent run (per softmin stage in maximize_minimum)
  double grad_tol = 1e-9;        ///< projected-gradient residual, relative to 1 + |objective|
  /// Also stop once the objective gains less than stall_tol * (1 + |f|) over
  /// stall_window iterations. 0 disables.
  double stall_tol = 1e-8;
  int stall_window = 10;
  double step_init = 0.0;        ///< <= 0: estimate 1/L from Hessian-vector power iterations
  double armijo_shrink = 0.5;
  double armijo_c = 1e-4;
  double tau_init = 1.0;         ///< softmin temperature schedule
  double tau_final = 1e-4;
  double tau_factor = 0.5;
  double penalty_init = 10.0;    ///< QoS exact-penalty weight, doubled until feasible
  double penalty_max = 1e6;
  double qos_tol = 1e-7;
};

struct SolveResult {
  CovarianceSet point;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// A smooth function of the K covariances. Fills `grad` (one matrix per user)
/// when non-null.
using Functional = std::function<double(const Matrices& p, Matrices* grad)>;

/// `size` functionals evaluated together; grads[j][i] = d f_j / d P_i.
struct FunctionalFamily {
  std::size_t size = 0;
  std::function<void(const Matrices& p, std::vector<double>& values, std::vector<Matrices>* grads)> eval;
};

/// J P J^T averaged with P, J = [[0, -I], [I, 0]]: the Frobenius projection
/// onto the proper pattern.
RealMat proper_structure_projection(const RealMat& p);
/// || P - proper_structure_projection(P) ||_F
double structure_residual(const RealMat& p);

CovarianceSet project_feasible(const CovarianceSet& p, const FeasibleSetSpec& spec);

/// Projected gradient ascent with Barzilai-Borwein trial steps and Armijo
/// backtracking; the objective is non-decreasing per iteration. Stops when
/// ||P - proj(P + grad)|| <= grad_tol (1 + |f|) or after max_iters.
/// Throws NumericalError if the objective is not finite at the start.
SolveResult maximize_concave(const Functional& objective, const FeasibleSetSpec& spec, const CovarianceSet& start,
                             const SolveOptions& opts);

/// Maximizes min_k f_k / w_k (entries with w_k == 0 are ignored) subject to
/// optional concave constraints g_j >= 0. The min is smoothed by a softmin
/// with annealed temperature and constraints enter as a smoothed exact
/// penalty. The returned point is the best exactly evaluated iterate whose
/// constraint violation is within qos_tol. Throws InfeasibleError when no such
/// iterate exists at the largest penalty weight.
SolveResult maximize_minimum(const FunctionalFamily& objectives, std::span<const double> weights,
                             const FunctionalFamily* qos, const FeasibleSetSpec& spec, const CovarianceSet& start,
                             const SolveOptions& opts);

}  // namespace hwigs
