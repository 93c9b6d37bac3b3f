#include "hwigs/problems.hpp"

#include "hwigs/errors.hpp"
#include "hwigs/surrogate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace hwigs {
namespace {

constexpr double kQosSlack = 1e-9;

// Surrogate rates minus mu_k times the power consumption of each user.
FunctionalFamily rate_family(const SurrogateState& s, const EffectiveNetwork& e, std::vector<double> mu = {}) {
  FunctionalFamily fam;
  fam.size = static_cast<std::size_t>(e.users);
  fam.eval = [&s, &e, mu = std::move(mu)](const Matrices& p, std::vector<double>& values, std::vector<Matrices>* grads) {
    values.resize(static_cast<std::size_t>(e.users));
    if (grads != nullptr) grads->resize(static_cast<std::size_t>(e.users));
    for (int k = 0; k < e.users; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      Matrices* g = grads != nullptr ? &(*grads)[kk] : nullptr;
      values[kk] = surrogate_rate(s, e, p, k, g);
      if (!mu.empty() && mu[kk] != 0.0) {
        values[kk] -= mu[kk] * e.consumption(k, p[kk]);
        if (g != nullptr) (*g)[kk].diagonal().array() -= mu[kk] * e.eta[kk];
      }
    }
  };
  return fam;
}

// R~_k - R_th,k for users with a positive threshold.
FunctionalFamily qos_family(const SurrogateState& s, const EffectiveNetwork& e, const std::vector<double>& r_th) {
  std::vector<int> users;
  for (int k = 0; k < e.users; ++k) {
    if (r_th[static_cast<std::size_t>(k)] > 0.0) users.push_back(k);
  }
  FunctionalFamily fam;
  fam.size = users.size();
  fam.eval = [&s, &e, &r_th, users](const Matrices& p, std::vector<double>& values, std::vector<Matrices>* grads) {
    values.resize(users.size());
    if (grads != nullptr) grads->resize(users.size());
    for (std::size_t j = 0; j < users.size(); ++j) {
      const int k = users[j];
      values[j] = surrogate_rate(s, e, p, k, grads != nullptr ? &(*grads)[j] : nullptr) -
                  r_th[static_cast<std::size_t>(k)];
    }
  };
  return fam;
}

Functional sum_of(const FunctionalFamily& fam) {
  return [fam](const Matrices& p, Matrices* grad) {
    std::vector<double> values;
    std::vector<Matrices> grads;
    fam.eval(p, values, grad != nullptr ? &grads : nullptr);
    double total = 0.0;
    for (double v : values) total += v;
    if (grad != nullptr) {
      *grad = grads.front();
      for (std::size_t j = 1; j < grads.size(); ++j) {
        for (std::size_t i = 0; i < grad->size(); ++i) (*grad)[i] += grads[j][i];
      }
    }
    return total;
  };
}

FunctionalFamily single(Functional f) {
  FunctionalFamily fam;
  fam.size = 1;
  fam.eval = [f = std::move(f)](const Matrices& p, std::vector<double>& values, std::vector<Matrices>* grads) {
    values.resize(1);
    if (grads != nullptr) {
      grads->resize(1);
      values[0] = f(p, &(*grads)[0]);
    } else {
      values[0] = f(p, nullptr);
    }
  };
  return fam;
}

FeasibleSetSpec set_spec(const EffectiveNetwork& e, Signaling mode) { return {mode, e.power_budget, e.n_tx}; }

bool satisfies_qos(const RateReport& r, const std::vector<double>& r_th) {
  for (std::size_t k = 0; k < r_th.size(); ++k) {
    if (r.rate[k] < r_th[k] - kQosSlack) return false;
  }
  return true;
}

SolveOptions warm(const MMOptions& opts, bool is_warm) {
  SolveOptions s = opts.solver;
  if (is_warm) s.tau_init = std::max(std::min(s.tau_init, opts.warm_tau_init), s.tau_final);
  return s;
}

// Returns a start point satisfying the QoS thresholds, or throws
// InfeasibleError. The fairness point of the threshold-proportional rate
// profile is used when the given start violates them.
CovarianceSet qos_feasible_start(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
                                 CovarianceSet start, OptimizeTrace& trace) {
  const auto r_th = spec.thresholds(e.users);
  if (satisfies_qos(rates(e, start), r_th)) return start;
  ProblemSpec profile;
  profile.kind = ProblemKind::RateRegion;
  profile.mode = spec.mode;
  profile.alphas = r_th;
  const CovarianceSet rate_start = default_start(e, ProblemKind::RateRegion, start.mode);
  Solution fair = solve_rate_region(e, profile, opts, rate_start);
  trace.qos_precheck_used = true;
  trace.solver_iterations += fair.trace.solver_iterations;
  if (!satisfies_qos(fair.trace.final_report, r_th)) {
    throw InfeasibleError("QoS thresholds are infeasible: the threshold-proportional fairness point reaches min R_k/R_th,k = " +
                          std::to_string(fair.objective / std::accumulate(r_th.begin(), r_th.end(), 0.0)));
  }
  return fair.point;
}

// One surrogate-problem solve, returning the new point.
using InnerStep = std::function<CovarianceSet(const SurrogateState&, const CovarianceSet&, int, OptimizeTrace&)>;

Solution mm_loop(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts, CovarianceSet x,
                 OptimizeTrace trace, const InnerStep& inner) {
  RateReport report = rates(e, x);
  double obj = exact_objective(spec, e, report);
  trace.objective.push_back(obj);
  for (int l = 0; l < opts.max_outer; ++l) {
    const SurrogateState s = build_surrogate(e, x);
    x = inner(s, x, l, trace);
    report = rates(e, x);
    const double next = exact_objective(spec, e, report);
    trace.objective.push_back(next);
    const double change = std::abs(next - obj);
    obj = next;
    if (change <= opts.outer_tol * (1.0 + std::abs(obj))) {
      trace.converged = true;
      break;
    }
  }
  trace.final_report = report;
  return Solution{std::move(x), obj, std::move(trace)};
}

CovarianceSet resolve_start(const EffectiveNetwork& e, const ProblemSpec& spec, std::optional<CovarianceSet> start) {
  const Signaling set = feasible_set(spec.mode);
  if (!start) return default_start(e, spec.kind, set);
  return project_feasible(*start, set_spec(e, set));
}

// min_k (surrogate EE_k / alpha_k) over weighted users.
double surrogate_min_ee(const SurrogateState& s, const EffectiveNetwork& e, const Matrices& p,
                        const std::vector<double>& alphas) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < e.users; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (alphas[kk] <= 0.0) continue;
    const double u = e.consumption(k, p[kk]);
    m = std::min(m, surrogate_rate(s, e, p, k) / u / alphas[kk]);
  }
  return m;
}

double surrogate_global_ee(const SurrogateState& s, const EffectiveNetwork& e, const Matrices& p) {
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < e.users; ++k) {
    num += surrogate_rate(s, e, p, k);
    den += e.consumption(k, p[static_cast<std::size_t>(k)]);
  }
  return num / den;
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::RateRegion: return "rate-region";
    case ProblemKind::SumRate: return "sum-rate";
    case ProblemKind::EERegion: return "ee-region";
    case ProblemKind::GlobalEE: return "global-ee";
  }
  return "?";
}

std::string_view to_string(DesignMode mode) {
  switch (mode) {
    case DesignMode::IGS: return "IGS";
    case DesignMode::PGS: return "PGS";
    case DesignMode::IdealPGS: return "I-PGS";
  }
  return "?";
}

ProblemKind parse_problem_kind(std::string_view text) {
  for (auto k : {ProblemKind::RateRegion, ProblemKind::SumRate, ProblemKind::EERegion, ProblemKind::GlobalEE}) {
    if (text == to_string(k)) return k;
  }
  throw InvalidArgument("unknown problem '" + std::string(text) + "' (rate-region, sum-rate, ee-region, global-ee)");
}

DesignMode parse_design_mode(std::string_view text) {
  if (text == "igs" || text == "IGS") return DesignMode::IGS;
  if (text == "pgs" || text == "PGS") return DesignMode::PGS;
  if (text == "i-pgs" || text == "I-PGS" || text == "ipgs") return DesignMode::IdealPGS;
  throw InvalidArgument("unknown mode '" + std::string(text) + "' (igs, pgs, i-pgs)");
}

std::vector<double> ProblemSpec::weights(int users) const {
  const auto k = static_cast<std::size_t>(users);
  if (alphas.empty()) return std::vector<double>(k, 1.0 / users);
  if (alphas.size() != k) throw InvalidArgument("problem: expected one alpha per user");
  double total = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0)) throw InvalidArgument("problem: alphas must be >= 0");
    total += a;
  }
  if (!(total > 0.0)) throw InvalidArgument("problem: alphas must not all be zero");
  std::vector<double> out(alphas);
  for (auto& a : out) a /= total;
  return out;
}

std::vector<double> ProblemSpec::thresholds(int users) const {
  const auto k = static_cast<std::size_t>(users);
  if (r_th.empty()) return std::vector<double>(k, 0.0);
  if (r_th.size() != k) throw InvalidArgument("problem: expected one rate threshold per user");
  for (double r : r_th) {
    if (!(r >= 0.0)) throw InvalidArgument("problem: rate thresholds must be >= 0");
  }
  return r_th;
}

bool ProblemSpec::has_qos() const {
  return kind != ProblemKind::RateRegion && std::any_of(r_th.begin(), r_th.end(), [](double r) { return r > 0.0; });
}

double exact_objective(const ProblemSpec& spec, const EffectiveNetwork& e, const RateReport& report) {
  switch (spec.kind) {
    case ProblemKind::SumRate: return report.sum_rate;
    case ProblemKind::GlobalEE: return report.global_ee;
    case ProblemKind::RateRegion:
    case ProblemKind::EERegion: {
      const auto alphas = spec.weights(e.users);
      const auto& values = spec.kind == ProblemKind::RateRegion ? report.rate : report.ee;
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < alphas.size(); ++k) {
        if (alphas[k] > 0.0) m = std::min(m, values[k] / alphas[k]);
      }
      return m;
    }
  }
  return 0.0;
}

Signaling feasible_set(DesignMode mode) { return mode == DesignMode::IGS ? Signaling::IGS : Signaling::PGS; }

CovarianceSet default_start(const EffectiveNetwork& e, ProblemKind kind, Signaling set) {
  const bool ee = kind == ProblemKind::EERegion || kind == ProblemKind::GlobalEE;
  CovarianceSet out;
  out.mode = set;
  for (int k = 0; k < e.users; ++k) {
    const double budget = e.power_budget[static_cast<std::size_t>(k)];
    const double per_dim = (ee ? 0.3 : 1.0) * budget / (2.0 * e.n_tx);
    out.mats.push_back(RealMat::Identity(2 * e.n_tx, 2 * e.n_tx) * per_dim);
  }
  return out;
}

Solution solve_rate_region(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
                           std::optional<CovarianceSet> start) {
  if (spec.kind != ProblemKind::RateRegion) throw InvalidArgument("solve_rate_region: wrong problem kind");
  const auto alphas = spec.weights(e.users);
  const FeasibleSetSpec set = set_spec(e, feasible_set(spec.mode));
  const InnerStep inner = [&](const SurrogateState& s, const CovarianceSet& x, int l, OptimizeTrace& trace) {
    const SolveResult r = maximize_minimum(rate_family(s, e), alphas, nullptr, set, x, warm(opts, l > 0));
    trace.solver_iterations += r.iterations;
    return r.point;
  };
  return mm_loop(e, spec, opts, resolve_start(e, spec, std::move(start)), {}, inner);
}

Solution solve_sum_rate(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
                        std::optional<CovarianceSet> start) {
  if (spec.kind != ProblemKind::SumRate) throw InvalidArgument("solve_sum_rate: wrong problem kind");
  const auto r_th = spec.thresholds(e.users);
  const FeasibleSetSpec set = set_spec(e, feasible_set(spec.mode));
  OptimizeTrace trace;
  CovarianceSet x = resolve_start(e, spec, std::move(start));
  if (spec.has_qos()) x = qos_feasible_start(e, spec, opts, std::move(x), trace);

  const InnerStep inner = [&](const SurrogateState& s, const CovarianceSet& x_l, int l, OptimizeTrace& tr) {
    const FunctionalFamily fam = rate_family(s, e);
    SolveResult r;
    if (spec.has_qos()) {
      const FunctionalFamily qos = qos_family(s, e, r_th);
      const std::vector<double> one{1.0};
      r = maximize_minimum(single(sum_of(fam)), one, &qos, set, x_l, warm(opts, l > 0));
    } else {
      r = maximize_concave(sum_of(fam), set, x_l, opts.solver);
    }
    tr.solver_iterations += r.iterations;
    return r.point;
  };
  return mm_loop(e, spec, opts, std::move(x), std::move(trace), inner);
}

Solution solve_ee_region(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
                         std::optional<CovarianceSet> start) {
  if (spec.kind != ProblemKind::EERegion) throw InvalidArgument("solve_ee_region: wrong problem kind");
  const auto alphas = spec.weights(e.users);
  const auto r_th = spec.thresholds(e.users);
  const FeasibleSetSpec set = set_spec(e, feasible_set(spec.mode));
  OptimizeTrace trace;
  CovarianceSet x = resolve_start(e, spec, std::move(start));
  if (spec.has_qos()) x = qos_feasible_start(e, spec, opts, std::move(x), trace);

  const InnerStep inner = [&](const SurrogateState& s, const CovarianceSet& x_l, int l, OptimizeTrace& tr) {
    std::optional<FunctionalFamily> qos;
    if (spec.has_qos()) qos = qos_family(s, e, r_th);
    CovarianceSet point = x_l;
    double mu = surrogate_min_ee(s, e, point.mats, alphas);
    std::vector<double> mus;
    double residual = std::numeric_limits<double>::infinity();
    bool done = false;
    for (int m = 0; m < opts.max_inner; ++m) {
      mus.push_back(mu);
      // Constraint k reads R_k - mu a_k u_k >= t a_k u_k(previous point); the
      // normalization by the previous consumption speeds up the mu iteration.
      std::vector<double> scaled_mu(alphas.size());
      std::vector<double> scale(alphas.size());
      for (std::size_t k = 0; k < alphas.size(); ++k) {
        scaled_mu[k] = mu * alphas[k];
        scale[k] = alphas[k] * e.consumption(static_cast<int>(k), point.mats[k]);
      }
      const SolveResult r = maximize_minimum(rate_family(s, e, std::move(scaled_mu)), scale, qos ? &*qos : nullptr, set, point,
                                             warm(opts, l > 0 || m > 0));
      tr.solver_iterations += r.iterations;
      point = r.point;
      residual = r.objective;
      mu = surrogate_min_ee(s, e, point.mats, alphas);
      if (residual <= opts.inner_tol) {
        done = true;
        break;
      }
    }
    mus.push_back(mu);
    tr.mu.push_back(std::move(mus));
    tr.inner_residual.push_back(residual);
    tr.inner_converged = tr.inner_converged && done;
    return point;
  };
  return mm_loop(e, spec, opts, std::move(x), std::move(trace), inner);
}

Solution solve_global_ee(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
                         std::optional<CovarianceSet> start) {
  if (spec.kind != ProblemKind::GlobalEE) throw InvalidArgument("solve_global_ee: wrong problem kind");
  const auto r_th = spec.thresholds(e.users);
  const FeasibleSetSpec set = set_spec(e, feasible_set(spec.mode));
  OptimizeTrace trace;
  CovarianceSet x = resolve_start(e, spec, std::move(start));
  if (spec.has_qos()) x = qos_feasible_start(e, spec, opts, std::move(x), trace);

  const InnerStep inner = [&](const SurrogateState& s, const CovarianceSet& x_l, int l, OptimizeTrace& tr) {
    std::optional<FunctionalFamily> qos;
    if (spec.has_qos()) qos = qos_family(s, e, r_th);
    const Functional total_rate = sum_of(rate_family(s, e));
    CovarianceSet point = x_l;
    double mu = surrogate_global_ee(s, e, point.mats);
    std::vector<double> mus;
    double residual = std::numeric_limits<double>::infinity();
    bool done = false;
    for (int m = 0; m < opts.max_inner; ++m) {
      mus.push_back(mu);
      const Functional parametric = [&, mu](const Matrices& p, Matrices* grad) {
        double value = total_rate(p, grad);
        for (int k = 0; k < e.users; ++k) {
          const auto kk = static_cast<std::size_t>(k);
          value -= mu * e.consumption(k, p[kk]);
          if (grad != nullptr) (*grad)[kk].diagonal().array() -= mu * e.eta[kk];
        }
        return value;
      };
      SolveResult r;
      if (qos) {
        const std::vector<double> one{1.0};
        r = maximize_minimum(single(parametric), one, &*qos, set, point, warm(opts, l > 0 || m > 0));
      } else {
        r = maximize_concave(parametric, set, point, opts.solver);
      }
      tr.solver_iterations += r.iterations;
      point = r.point;
      residual = r.objective;
      mu = surrogate_global_ee(s, e, point.mats);
      if (residual <= opts.inner_tol) {
        done = true;
        break;
      }
    }
    mus.push_back(mu);
    tr.mu.push_back(std::move(mus));
    tr.inner_residual.push_back(residual);
    tr.inner_converged = tr.inner_converged && done;
    return point;
  };
  return mm_loop(e, spec, opts, std::move(x), std::move(trace), inner);
}

Solution solve(const EffectiveNetwork& e, const ProblemSpec& spec, const MMOptions& opts,
               std::optional<CovarianceSet> start) {
  switch (spec.kind) {
    case ProblemKind::RateRegion: return solve_rate_region(e, spec, opts, std::move(start));
    case ProblemKind::SumRate: return solve_sum_rate(e, spec, opts, std::move(start));
    case ProblemKind::EERegion: return solve_ee_region(e, spec, opts, std::move(start));
    case ProblemKind::GlobalEE: return solve_global_ee(e, spec, opts, std::move(start));
  }
  throw InvalidArgument("solve: unknown problem kind");
}

ModeOutcome run_mode(const NetworkScenario& scenario, const EffectiveNetwork& network, const ProblemSpec& spec,
                     const MMOptions& opts, const CovarianceSet* warm_start) {
  const auto t0 = std::chrono::steady_clock::now();
  ModeOutcome out;
  out.mode = spec.mode;
  switch (spec.mode) {
    case DesignMode::PGS:
      out.solution = solve(network, spec, opts);
      break;
    case DesignMode::IGS: {
      std::optional<CovarianceSet> start;
      if (warm_start != nullptr) {
        start = *warm_start;
      } else {
        ProblemSpec pgs = spec;
        pgs.mode = DesignMode::PGS;
        start = solve(network, pgs, opts).point;
      }
      start->mode = Signaling::IGS;
      out.solution = solve(network, spec, opts, std::move(start));
      break;
    }
    case DesignMode::IdealPGS: {
      const EffectiveNetwork ideal = build_effective(without_imbalance(scenario));
      out.solution = solve(ideal, spec, opts);
      break;
    }
  }
  out.report = rates(network, out.solution.point);
  out.objective = exact_objective(spec, network, out.report);
  out.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ModeComparison run_all_modes(const NetworkScenario& scenario, const ProblemSpec& spec, const MMOptions& opts) {
  const EffectiveNetwork network = build_effective(scenario);
  ModeComparison c;
  ProblemSpec s = spec;
  s.mode = DesignMode::PGS;
  c.pgs = run_mode(scenario, network, s, opts);
  s.mode = DesignMode::IGS;
  c.igs = run_mode(scenario, network, s, opts, &c.pgs.solution.point);
  s.mode = DesignMode::IdealPGS;
  c.ideal_pgs = run_mode(scenario, network, s, opts);
  return c;
}

}  // namespace hwigs
