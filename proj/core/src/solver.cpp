#include "hwigs/solver.hpp"

#include "hwigs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hwigs {
namespace {

constexpr int kMaxBacktracks = 60;
constexpr int kPowerIterations = 5;
// The projected-gradient residual costs a projection; it is checked periodically.
constexpr int kResidualEvery = 5;
constexpr double kMinStep = 1e-14;
constexpr double kMaxStep = 1e8;

double dot(const Matrices& a, const Matrices& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

double norm(const Matrices& a) { return std::sqrt(dot(a, a)); }

Matrices combine(const Matrices& x, double step, const Matrices& g) {
  Matrices out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + step * g[i];
  return out;
}

Matrices difference(const Matrices& a, const Matrices& b) {
  Matrices out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Matrices project_mats(const Matrices& x, const FeasibleSetSpec& spec) {
  return project_feasible(CovarianceSet{spec.mode, x}, spec).mats;
}

RealMat project_proper(const RealMat& p, double cap) {
  const RealMat structured = proper_structure_projection(p);
  const ComplexMat m = complexify(structured);
  Eigen::SelfAdjointEigenSolver<ComplexMat> eig(m);
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<double> values(n);
  // Descending order; the solver returns ascending eigenvalues.
  for (std::size_t i = 0; i < n; ++i) values[i] = eig.eigenvalues()(static_cast<Eigen::Index>(n - 1 - i));
  // Each eigenvalue of A + jB appears twice in the real form, so the real
  // trace cap halves here.
  const auto projected = project_capped_simplex(values, 0.5 * cap);
  ComplexMat out = ComplexMat::Zero(m.rows(), m.cols());
  for (std::size_t i = 0; i < n; ++i) {
    if (projected[i] <= 0.0) continue;
    const auto col = eig.eigenvectors().col(static_cast<Eigen::Index>(n - 1 - i));
    out.noalias() += projected[i] * col * col.adjoint();
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return realify(out);
}

// 1 / L from power iterations on finite-difference Hessian-vector products.
double estimate_step(const Functional& fn, const Matrices& x, const Matrices& g) {
  const double gn = norm(g);
  if (!(gn > 0.0)) return 1.0;
  Matrices v = g;
  for (auto& m : v) m /= gn;
  const double h = 1e-6 * (1.0 + norm(x));
  double curvature = 0.0;
  try {
    for (int it = 0; it < kPowerIterations; ++it) {
      Matrices gv;
      fn(combine(x, h, v), &gv);
      Matrices hv = difference(gv, g);
      const double hn = norm(hv);
      if (!(hn > 0.0) || !std::isfinite(hn)) break;
      curvature = hn / h;
      for (auto& m : hv) m /= hn;
      v = std::move(hv);
    }
  } catch (const NumericalError&) {
    // Perturbed point left the domain; fall back to the default step.
    return 1.0;
  }
  if (!(curvature > 0.0)) return kMaxStep;
  return std::clamp(1.0 / curvature, kMinStep, kMaxStep);
}

struct AscentOutcome {
  Matrices x;
  double f = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// `probe` evaluates the same function at the infeasible points used by the
// curvature estimate.
AscentOutcome ascend(const Functional& fn, const Functional& probe, const FeasibleSetSpec& spec, Matrices x,
                     const SolveOptions& opts) {
  AscentOutcome out;
  Matrices g;
  double f = fn(x, &g);
  if (!std::isfinite(f)) throw NumericalError("maximize_concave: objective is not finite at the start point");
  double step = opts.step_init > 0.0 ? opts.step_init : estimate_step(probe, x, g);

  Matrices x_prev;
  Matrices g_prev;
  bool have_prev = false;
  bool use_bb1 = true;
  double residual = 0.0;
  // Objective values of recent iterates; Armijo steps make them non-decreasing.
  std::vector<double> history;
  const auto window = static_cast<std::size_t>(std::max(opts.stall_window, 1));
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    history.push_back(f);
    if (opts.stall_tol > 0.0 && history.size() > window &&
        f - history[history.size() - 1 - window] <= opts.stall_tol * (1.0 + std::abs(f))) {
      out.converged = true;
      break;
    }
    if (it % kResidualEvery == 0) {
      residual = norm(difference(x, project_mats(combine(x, 1.0, g), spec)));
      if (residual <= opts.grad_tol * (1.0 + std::abs(f))) {
        out.converged = true;
        break;
      }
    }
    if (have_prev) {
      const Matrices s = difference(x, x_prev);
      const Matrices y = difference(g, g_prev);
      const double sy = -dot(s, y);
      if (sy > 0.0) {
        step = use_bb1 ? dot(s, s) / sy : sy / dot(y, y);
        use_bb1 = !use_bb1;
      } else {
        step *= 2.0;
      }
      step = std::clamp(step, kMinStep, kMaxStep);
    }

    bool accepted = false;
    Matrices y_pt;
    Matrices g_new;
    double f_new = f;
    for (int ls = 0; ls < kMaxBacktracks; ++ls) {
      y_pt = project_mats(combine(x, step, g), spec);
      const Matrices d = difference(y_pt, x);
      const double gd = dot(g, d);
      if (!(norm(d) > 0.0)) break;
      f_new = fn(y_pt, &g_new);
      if (std::isfinite(f_new) && f_new >= f + opts.armijo_c * gd) {
        accepted = true;
        break;
      }
      step *= opts.armijo_shrink;
    }
    if (!accepted) {
      // No ascent direction survives backtracking: numerically stationary.
      out.converged = true;
      break;
    }
    x_prev = std::move(x);
    g_prev = std::move(g);
    have_prev = true;
    x = std::move(y_pt);
    g = std::move(g_new);
    f = f_new;
  }
  if (it % kResidualEvery != 0 || !out.converged) residual = norm(difference(x, project_mats(combine(x, 1.0, g), spec)));
  out.x = std::move(x);
  out.f = f;
  out.residual = residual;
  out.iterations = it;
  return out;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

RealMat proper_structure_projection(const RealMat& p) {
  const auto n = p.rows() / 2;
  const auto p11 = p.topLeftCorner(n, n);
  const auto p12 = p.topRightCorner(n, n);
  const auto p21 = p.bottomLeftCorner(n, n);
  const auto p22 = p.bottomRightCorner(n, n);
  const RealMat a = 0.25 * (p11 + p22 + p11.transpose() + p22.transpose());
  const RealMat b = 0.25 * (p21 - p12 - p21.transpose() + p12.transpose());
  RealMat out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = a;
  out.bottomRightCorner(n, n) = a;
  out.bottomLeftCorner(n, n) = b;
  out.topRightCorner(n, n) = -b;
  return out;
}

double structure_residual(const RealMat& p) { return (p - proper_structure_projection(p)).norm(); }

CovarianceSet project_feasible(const CovarianceSet& p, const FeasibleSetSpec& spec) {
  if (p.mats.size() != spec.budgets.size()) throw InvalidArgument("project_feasible: one budget per user required");
  CovarianceSet out;
  out.mode = spec.mode;
  out.mats.resize(p.mats.size());
  for (std::size_t k = 0; k < p.mats.size(); ++k) {
    if (p.mats[k].rows() != 2 * spec.n_tx || p.mats[k].cols() != 2 * spec.n_tx) {
      throw InvalidArgument("project_feasible: covariance must be 2 n_tx square");
    }
    out.mats[k] = spec.mode == Signaling::IGS ? project_psd_trace(p.mats[k], spec.budgets[k])
                                              : project_proper(p.mats[k], spec.budgets[k]);
  }
  return out;
}

SolveResult maximize_concave(const Functional& objective, const FeasibleSetSpec& spec, const CovarianceSet& start,
                             const SolveOptions& opts) {
  const CovarianceSet x0 = project_feasible(start, spec);
  AscentOutcome run = ascend(objective, objective, spec, x0.mats, opts);
  SolveResult r;
  r.point = CovarianceSet{spec.mode, std::move(run.x)};
  r.objective = run.f;
  r.kkt_residual = run.residual;
  r.iterations = run.iterations;
  r.converged = run.converged;
  return r;
}

SolveResult maximize_minimum(const FunctionalFamily& objectives, std::span<const double> weights,
                             const FunctionalFamily* qos, const FeasibleSetSpec& spec, const CovarianceSet& start,
                             const SolveOptions& opts) {
  if (weights.size() != objectives.size) throw InvalidArgument("maximize_minimum: one weight per objective required");
  if (std::none_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; })) {
    throw InvalidArgument("maximize_minimum: at least one weight must be positive");
  }
  for (double w : weights) {
    if (w < 0.0) throw InvalidArgument("maximize_minimum: negative weight");
  }
  const bool has_qos = qos != nullptr && qos->size > 0;

  Matrices best_point;
  double best_value = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  bool probing = false;

  double tau = opts.tau_init;
  double rho = opts.penalty_init;

  std::vector<double> values(objectives.size);
  std::vector<Matrices> grads;
  std::vector<double> qos_values(has_qos ? qos->size : 0);
  std::vector<Matrices> qos_grads;
  std::vector<double> scaled(objectives.size);

  // Smoothed objective; also records the best exactly evaluated feasible point.
  const Functional smoothed = [&](const Matrices& p, Matrices* grad) {
    objectives.eval(p, values, grad != nullptr ? &grads : nullptr);
    double exact_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (weights[j] > 0.0) exact_min = std::min(exact_min, values[j] / weights[j]);
    }
    double soft = 0.0;
    if (grad != nullptr) {
      grad->assign(p.size(), RealMat());
      for (std::size_t i = 0; i < p.size(); ++i) (*grad)[i].setZero(p[i].rows(), p[i].cols());
    }
    double norm_sum = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      scaled[j] = weights[j] > 0.0 ? std::exp(-(values[j] / weights[j] - exact_min) / tau) : 0.0;
      norm_sum += scaled[j];
    }
    soft = exact_min - tau * std::log(norm_sum);
    if (grad != nullptr) {
      for (std::size_t j = 0; j < values.size(); ++j) {
        if (scaled[j] == 0.0) continue;
        const double c = scaled[j] / (norm_sum * weights[j]);
        for (std::size_t i = 0; i < p.size(); ++i) (*grad)[i] += c * grads[j][i];
      }
    }

    bool feasible = true;
    if (has_qos) {
      qos->eval(p, qos_values, grad != nullptr ? &qos_grads : nullptr);
      for (std::size_t j = 0; j < qos_values.size(); ++j) {
        if (qos_values[j] < -opts.qos_tol) feasible = false;
        soft -= rho * tau * softplus(-qos_values[j] / tau);
        if (grad != nullptr) {
          const double c = rho * logistic(-qos_values[j] / tau);
          for (std::size_t i = 0; i < p.size(); ++i) (*grad)[i] += c * qos_grads[j][i];
        }
      }
    }
    if (!probing && feasible && std::isfinite(exact_min) && exact_min > best_value) {
      best_value = exact_min;
      best_point = p;
      have_best = true;
    }
    return soft;
  };
  const Functional probe = [&](const Matrices& p, Matrices* grad) {
    probing = true;
    try {
      const double v = smoothed(p, grad);
      probing = false;
      return v;
    } catch (...) {
      probing = false;
      throw;
    }
  };

  Matrices x = project_feasible(start, spec).mats;
  SolveResult r;
  while (true) {
    tau = opts.tau_init;
    while (true) {
      AscentOutcome run = ascend(smoothed, probe, spec, x, opts);
      x = std::move(run.x);
      r.iterations += run.iterations;
      r.kkt_residual = run.residual;
      r.converged = run.converged;
      if (tau <= opts.tau_final) break;
      tau = std::max(tau * opts.tau_factor, opts.tau_final);
    }
    if (have_best || !has_qos) break;
    rho *= 2.0;
    if (rho > opts.penalty_max) {
      throw InfeasibleError("maximize_minimum: QoS constraints remain violated at the maximum penalty weight");
    }
  }
  if (!have_best) throw NumericalError("maximize_minimum: no finite objective value encountered");
  r.point = CovarianceSet{spec.mode, std::move(best_point)};
  r.objective = best_value;
  return r;
}

}  // namespace hwigs
