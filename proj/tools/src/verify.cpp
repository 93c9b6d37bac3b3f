#include "hwigs_cli/cli.hpp"

#include "hwigs/surrogate.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>

namespace hwigs::cli {
namespace {

constexpr std::uint64_t kVerifySeed = 20240611;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

ComplexMat random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  ComplexMat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = {n(rng), n(rng)};
  }
  return m;
}

RealMat random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  RealMat m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = g(rng);
  }
  return symmetrize(m);
}

Matrices random_direction(const Matrices& like, std::mt19937_64& rng) {
  Matrices d;
  for (const auto& m : like) d.push_back(random_symmetric(m.rows(), rng));
  return d;
}

Matrices shifted(const Matrices& p, double h, const Matrices& d) {
  Matrices out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] + h * d[i];
  return out;
}

// Worst relative error between analytic directional derivatives and central
// differences over a few random directions.
template <typename Fn>
double gradient_error(const Fn& fn, const Matrices& p, const Matrices& grad, std::mt19937_64& rng) {
  constexpr double kStep = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const Matrices d = random_direction(p, rng);
    double analytic = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) analytic += inner(grad[i], d[i]);
    const double numeric = (fn(shifted(p, kStep, d)) - fn(shifted(p, -kStep, d))) / (2.0 * kStep);
    worst = std::max(worst, std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-6));
  }
  return worst;
}

NetworkScenario small_scenario(int users, int antennas, std::uint64_t seed) {
  ScenarioParams p;
  p.users = users;
  p.n_tx = antennas;
  p.n_rx = antennas;
  return draw_scenario(p, seed);
}

using Check = std::function<VerifyCheck()>;

VerifyCheck realify_homomorphism() {
  std::mt19937_64 rng(kVerifySeed);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const ComplexMat a = random_complex(3, 3, rng);
    const ComplexMat b = random_complex(3, 3, rng);
    worst = std::max(worst, (realify(a * b) - realify(a) * realify(b)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (realify(a + b) - realify(a) - realify(b)).cwiseAbs().maxCoeff());
  }
  return {"realify-homomorphism", worst <= 1e-12, "max error " + fmt("%.2e", worst)};
}

VerifyCheck widely_linear_model() {
  std::mt19937_64 rng(kVerifySeed + 1);
  std::uniform_real_distribution<double> amp(0.5, 1.5);
  std::uniform_real_distribution<double> phase(-0.3, 0.3);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const ImbalanceParams tx = ImbalanceParams::uniform(amp(rng), phase(rng));
    const ImbalanceParams rx = ImbalanceParams::uniform(amp(rng), phase(rng));
    const ComplexMat h = random_complex(2, 2, rng);
    const HwiLinkModel link = effective_link(h, tx, rx);
    const ImbalancePair v = build_tx_imbalance(tx, 2);
    const ImbalancePair g = build_rx_imbalance(rx, 2);
    for (int s = 0; s < 10; ++s) {
      const Eigen::VectorXcd x = random_complex(2, 1, rng);
      const Eigen::VectorXcd u = v.first * x + v.second * x.conjugate();
      const Eigen::VectorXcd hu = h * u;
      const Eigen::VectorXcd chained = g.first * hu + g.second * hu.conjugate();
      const Eigen::VectorXcd direct = link.h1bar * x + link.h2bar * x.conjugate();
      Eigen::VectorXd xr(4);
      xr << x.real(), x.imag();
      Eigen::VectorXd yr(4);
      yr << direct.real(), direct.imag();
      worst = std::max(worst, (chained - direct).cwiseAbs().maxCoeff());
      worst = std::max(worst, (link.h_tilde * xr - yr).cwiseAbs().maxCoeff());
    }
  }
  return {"widely-linear-model", worst <= 1e-12, "max error " + fmt("%.2e", worst)};
}

VerifyCheck projection_idempotent() {
  std::mt19937_64 rng(kVerifySeed + 2);
  double worst_feas = 0.0;
  double worst_idem = 0.0;
  for (int t = 0; t < 50; ++t) {
    for (Signaling mode : {Signaling::IGS, Signaling::PGS}) {
      const FeasibleSetSpec spec{mode, {3.0}, 2};
      const CovarianceSet in{mode, {random_symmetric(4, rng) * 2.0}};
      const CovarianceSet once = project_feasible(in, spec);
      const CovarianceSet twice = project_feasible(once, spec);
      const RealMat& p = once.mats[0];
      worst_feas = std::max({worst_feas, -min_eigenvalue(p), p.trace() - 3.0});
      if (mode == Signaling::PGS) worst_feas = std::max(worst_feas, structure_residual(p));
      worst_idem = std::max(worst_idem, (twice.mats[0] - p).norm());
    }
  }
  const bool ok = worst_feas <= 1e-10 && worst_idem <= 1e-10;
  return {"projection-idempotent", ok,
          "feasibility " + fmt("%.2e", worst_feas) + ", idempotence " + fmt("%.2e", worst_idem)};
}

VerifyCheck surrogate_touching() {
  std::mt19937_64 rng(kVerifySeed + 3);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const EffectiveNetwork e = build_effective(small_scenario(2 + t % 2, 1 + t % 2, kVerifySeed + t));
    const CovarianceSet at = random_feasible(e, Signaling::IGS, rng);
    const SurrogateState s = build_surrogate(e, at);
    for (int k = 0; k < e.users; ++k) {
      worst = std::max(worst, std::abs(surrogate_rate(s, e, at.mats, k) - exact_rate(e, at.mats, k)));
    }
  }
  return {"surrogate-touching", worst <= 1e-10, "max gap " + fmt("%.2e", worst)};
}

VerifyCheck surrogate_minorization() {
  std::mt19937_64 rng(kVerifySeed + 4);
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 6; ++t) {
    const EffectiveNetwork e = build_effective(small_scenario(2 + t % 2, 1 + t % 2, kVerifySeed + 10 + t));
    const SurrogateState s = build_surrogate(e, random_feasible(e, Signaling::IGS, rng));
    for (int q = 0; q < 30; ++q) {
      const CovarianceSet p = random_feasible(e, q % 2 == 0 ? Signaling::IGS : Signaling::PGS, rng);
      for (int k = 0; k < e.users; ++k) {
        worst = std::max(worst, surrogate_rate(s, e, p.mats, k) - exact_rate(e, p.mats, k));
      }
    }
  }
  return {"surrogate-minorization", worst <= 1e-9, "max excess " + fmt("%.2e", worst)};
}

VerifyCheck surrogate_gradient(const VerifyHooks& hooks) {
  std::mt19937_64 rng(kVerifySeed + 5);
  double worst = 0.0;
  for (int t = 0; t < 4; ++t) {
    const EffectiveNetwork e = build_effective(small_scenario(2, 2, kVerifySeed + 20 + t));
    const SurrogateState s = build_surrogate(e, random_feasible(e, Signaling::IGS, rng));
    const CovarianceSet p = random_feasible(e, Signaling::IGS, rng);
    for (int k = 0; k < e.users; ++k) {
      Matrices grad;
      surrogate_rate(s, e, p.mats, k, &grad);
      if (hooks.tamper_gradient) hooks.tamper_gradient(grad);
      const auto fn = [&](const Matrices& q) { return surrogate_rate(s, e, q, k); };
      worst = std::max(worst, gradient_error(fn, p.mats, grad, rng));
    }
  }
  return {"surrogate-gradient", worst <= 1e-4, "max relative error " + fmt("%.2e", worst)};
}

VerifyCheck rate_gradient(const VerifyHooks& hooks) {
  std::mt19937_64 rng(kVerifySeed + 6);
  double worst = 0.0;
  for (int t = 0; t < 4; ++t) {
    const EffectiveNetwork e = build_effective(small_scenario(3, 1 + t % 2, kVerifySeed + 30 + t));
    const CovarianceSet p = random_feasible(e, Signaling::IGS, rng);
    const SurrogateState s = build_surrogate(e, p);
    for (int k = 0; k < e.users; ++k) {
      // At the expansion point the surrogate gradient must equal the exact one.
      Matrices grad;
      surrogate_rate(s, e, p.mats, k, &grad);
      if (hooks.tamper_gradient) hooks.tamper_gradient(grad);
      const auto fn = [&](const Matrices& q) { return exact_rate(e, q, k); };
      worst = std::max(worst, gradient_error(fn, p.mats, grad, rng));
    }
  }
  return {"rate-gradient-match", worst <= 1e-4, "max relative error " + fmt("%.2e", worst)};
}

VerifyCheck logdet_majorizer_bound() {
  std::mt19937_64 rng(kVerifySeed + 7);
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_touch = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = 2 + t % 4;
    const RealMat a = random_symmetric(n, rng);
    const RealMat b = random_symmetric(n, rng);
    const RealMat ref = a * a.transpose() + 0.1 * RealMat::Identity(n, n);
    const RealMat q = b * b.transpose() + 0.1 * RealMat::Identity(n, n);
    const AffineBound bound = logdet_majorizer(ref);
    const double logdet_q = factor_spd(q, "verify").log2det;
    const double logdet_ref = factor_spd(ref, "verify").log2det;
    worst_excess = std::max(worst_excess, logdet_q - bound(q));
    worst_touch = std::max(worst_touch, std::abs(logdet_ref - bound(ref)));
  }
  const bool ok = worst_excess <= 1e-10 && worst_touch <= 1e-10;
  return {"logdet-majorizer", ok, "max excess " + fmt("%.2e", worst_excess) + ", touch " + fmt("%.2e", worst_touch)};
}

VerifyCheck mm_monotone() {
  const NetworkScenario scenario = small_scenario(2, 1, kVerifySeed + 40);
  const EffectiveNetwork e = build_effective(scenario);
  double worst_obj = 0.0;
  double worst_mu = 0.0;
  for (ProblemKind kind : {ProblemKind::RateRegion, ProblemKind::SumRate, ProblemKind::EERegion, ProblemKind::GlobalEE}) {
    for (DesignMode mode : {DesignMode::PGS, DesignMode::IGS}) {
      ProblemSpec spec;
      spec.kind = kind;
      spec.mode = mode;
      const Solution sol = solve(e, spec, MMOptions{});
      const auto& obj = sol.trace.objective;
      for (std::size_t i = 1; i < obj.size(); ++i) {
        worst_obj = std::max(worst_obj, (obj[i - 1] - obj[i]) / (1.0 + std::abs(obj[i - 1])));
      }
      for (const auto& mu : sol.trace.mu) {
        for (std::size_t i = 1; i < mu.size(); ++i) worst_mu = std::max(worst_mu, mu[i - 1] - mu[i]);
      }
    }
  }
  const bool ok = worst_obj <= 1e-8 && worst_mu <= 1e-10;
  return {"mm-monotone", ok, "max objective drop " + fmt("%.2e", worst_obj) + ", mu drop " + fmt("%.2e", worst_mu)};
}

VerifyCheck igs_dominates_pgs() {
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    const NetworkScenario scenario = small_scenario(2, 1, kVerifySeed + 50 + t);
    ProblemSpec spec;
    const ModeComparison c = run_all_modes(scenario, spec, MMOptions{});
    worst = std::max(worst, c.pgs.objective - c.igs.objective);
  }
  return {"igs-dominates-pgs", worst <= 1e-9, "max shortfall " + fmt("%.2e", worst)};
}

}  // namespace

CovarianceSet random_feasible(const EffectiveNetwork& e, Signaling mode, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> fraction(0.05, 1.0);
  CovarianceSet out;
  out.mode = mode;
  for (int k = 0; k < e.users; ++k) {
    RealMat p;
    if (mode == Signaling::PGS) {
      const ComplexMat g = random_complex(e.n_tx, e.n_tx, rng);
      p = realify_covariance(g * g.adjoint());
    } else {
      const RealMat g = random_symmetric(2 * e.n_tx, rng);
      p = g * g.transpose();
    }
    const double budget = e.power_budget[static_cast<std::size_t>(k)];
    p *= fraction(rng) * budget / p.trace();
    out.mats.push_back(symmetrize(p));
  }
  return out;
}

std::vector<VerifyCheck> run_verify(const VerifyHooks& hooks) {
  const std::vector<std::pair<const char*, Check>> checks = {
      {"realify-homomorphism", realify_homomorphism},
      {"widely-linear-model", widely_linear_model},
      {"projection-idempotent", projection_idempotent},
      {"surrogate-touching", surrogate_touching},
      {"surrogate-minorization", surrogate_minorization},
      {"surrogate-gradient", [&hooks] { return surrogate_gradient(hooks); }},
      {"rate-gradient-match", [&hooks] { return rate_gradient(hooks); }},
      {"logdet-majorizer", logdet_majorizer_bound},
      {"mm-monotone", mm_monotone},
      {"igs-dominates-pgs", igs_dominates_pgs},
  };
  std::vector<VerifyCheck> out;
  for (const auto& [name, check] : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& ex) {
      out.push_back({name, false, std::string("threw: ") + ex.what()});
    }
  }
  return out;
}

}  // namespace hwigs::cli
