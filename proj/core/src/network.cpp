#include "hwigs/network.hpp"

#include "hwigs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace hwigs {
namespace {

class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

double ScenarioParams::power_budget() const { return std::pow(10.0, snr_db / 10.0) * sigma2_rx; }

void NetworkScenario::validate() const {
  if (users < 1 || n_tx < 1 || n_rx < 1) throw InvalidArgument("scenario: users and antenna counts must be >= 1");
  const auto k = static_cast<std::size_t>(users);
  if (channels.size() != k) throw InvalidArgument("scenario: channel grid must be users x users");
  for (const auto& row : channels) {
    if (row.size() != k) throw InvalidArgument("scenario: channel grid must be users x users");
    for (const auto& h : row) {
      if (h.rows() != n_rx || h.cols() != n_tx) {
        throw InvalidArgument("scenario: channel must be " + std::to_string(n_rx) + "x" + std::to_string(n_tx));
      }
      if (!h.allFinite()) throw InvalidArgument("scenario: non-finite channel entry");
    }
  }
  tx_imb.validate(n_tx);
  rx_imb.validate(n_rx);
  if (distortion.sigma2_tx < 0.0) throw InvalidArgument("scenario: sigma2_tx must be >= 0");
  if (!(distortion.sigma2_rx > 0.0)) {
    throw InvalidArgument("scenario: sigma2_rx must be > 0 (noise covariance would be singular)");
  }
  if (power_budget.size() != k || eta.size() != k || p_static.size() != k) {
    throw InvalidArgument("scenario: per-user parameter vectors must have one entry per user");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(power_budget[i] > 0.0)) throw InvalidArgument("scenario: power budgets must be > 0");
    if (!(eta[i] > 0.0)) throw InvalidArgument("scenario: eta must be > 0");
    if (!(p_static[i] >= 0.0)) throw InvalidArgument("scenario: static power must be >= 0");
  }
}

NetworkScenario draw_scenario(const ScenarioParams& params, std::uint64_t seed) {
  NetworkScenario s;
  s.seed = seed;
  s.users = params.users;
  s.n_tx = params.n_tx;
  s.n_rx = params.n_rx;
  if (params.users < 1 || params.n_tx < 1 || params.n_rx < 1) {
    throw InvalidArgument("scenario: users and antenna counts must be >= 1");
  }

  GaussianStream gauss(seed);
  const double scale = std::sqrt(0.5);
  const auto k = static_cast<std::size_t>(params.users);
  s.channels.assign(k, std::vector<ComplexMat>(k));
  for (auto& row : s.channels) {
    for (auto& h : row) {
      h.resize(params.n_rx, params.n_tx);
      for (Eigen::Index c = 0; c < h.cols(); ++c) {
        for (Eigen::Index r = 0; r < h.rows(); ++r) {
          const double re = scale * gauss.next();
          const double im = scale * gauss.next();
          h(r, c) = {re, im};
        }
      }
    }
  }

  const double phase = params.phase_deg * std::numbers::pi / 180.0;
  s.tx_imb = ImbalanceParams::uniform(params.a_tx, phase);
  s.rx_imb = ImbalanceParams::uniform(params.a_rx, phase);
  s.distortion = {params.sigma2_tx, params.sigma2_rx};
  s.power_budget.assign(k, params.power_budget());
  s.eta.assign(k, params.eta);
  s.p_static.assign(k, params.p_static);
  s.validate();
  return s;
}

NetworkScenario without_imbalance(const NetworkScenario& s) {
  NetworkScenario out = s;
  out.tx_imb = ImbalanceParams::ideal();
  out.rx_imb = ImbalanceParams::ideal();
  return out;
}

double EffectiveNetwork::consumption(int k, const RealMat& p) const {
  const auto idx = static_cast<std::size_t>(k);
  return eta[idx] * p.trace() + p_static[idx];
}

EffectiveNetwork build_effective(const NetworkScenario& s) {
  s.validate();
  EffectiveNetwork e;
  e.users = s.users;
  e.n_tx = s.n_tx;
  e.n_rx = s.n_rx;
  e.power_budget = s.power_budget;
  e.eta = s.eta;
  e.p_static = s.p_static;

  const auto k_count = static_cast<std::size_t>(s.users);
  const RealMat gamma = gamma_real(s.rx_imb, s.n_rx);
  const RealMat ct = RealMat::Identity(2 * s.n_tx, 2 * s.n_tx) * (0.5 * s.distortion.sigma2_tx);
  const RealMat cr = RealMat::Identity(2 * s.n_rx, 2 * s.n_rx) * (0.5 * s.distortion.sigma2_rx);

  e.links.resize(k_count);
  e.noise_cov.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    e.links[k].reserve(k_count);
    RealMat aggregate = cr;
    for (std::size_t i = 0; i < k_count; ++i) {
      e.links[k].push_back(effective_link(s.channels[k][i], s.tx_imb, s.rx_imb));
      const RealMat& hr = e.links[k][i].h_real;
      aggregate.noalias() += hr * ct * hr.transpose();
    }
    e.noise_cov[k] = symmetrize(gamma * aggregate * gamma.transpose());
  }
  return e;
}

CovarianceSet CovarianceSet::uniform(int users, int n_tx, double per_dim, Signaling mode) {
  CovarianceSet out;
  out.mode = mode;
  out.mats.assign(static_cast<std::size_t>(users), RealMat::Identity(2 * n_tx, 2 * n_tx) * per_dim);
  return out;
}

SpdFactor factor_spd(const RealMat& m, const char* what) {
  SpdFactor f;
  f.llt.compute(m);
  if (f.llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + ": matrix is not positive definite");
  }
  const auto diag = f.llt.matrixLLT().diagonal();
  const double lo = diag.minCoeff();
  const double hi = diag.maxCoeff();
  if (!(lo > 0.0) || (hi / lo) * (hi / lo) > kMaxCondition) {
    throw NumericalError(std::string(what) + ": matrix is singular beyond the conditioning threshold");
  }
  f.log2det = 2.0 * diag.array().log().sum() / std::numbers::ln2;
  return f;
}

RealMat received_covariance(const EffectiveNetwork& e, const Matrices& p, int k, int skip) {
  const auto kk = static_cast<std::size_t>(k);
  RealMat s = e.noise_cov[kk];
  RealMat hp;
  for (int i = 0; i < e.users; ++i) {
    if (i == skip) continue;
    const RealMat& h = e.h(k, i);
    // Small fixed-size products: lazy evaluation avoids the blocked GEMM path.
    hp.noalias() = h.lazyProduct(p[static_cast<std::size_t>(i)]);
    s.noalias() += hp.lazyProduct(h.transpose());
  }
  return s;
}

RateReport rates(const EffectiveNetwork& e, const CovarianceSet& p) {
  if (p.mats.size() != static_cast<std::size_t>(e.users)) {
    throw InvalidArgument("rates: expected one covariance per user");
  }
  RateReport r;
  const auto k_count = static_cast<std::size_t>(e.users);
  r.rate.resize(k_count);
  r.r1.resize(k_count);
  r.r2.resize(k_count);
  r.power.resize(k_count);
  r.ee.resize(k_count);
  for (int k = 0; k < e.users; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    RealMat interference = received_covariance(e, p.mats, k, k);
    const RealMat& h = e.h(k, k);
    RealMat total = interference;
    total.noalias() += h * p.mats[kk] * h.transpose();
    r.r1[kk] = 0.5 * factor_spd(total, "rates").log2det;
    r.r2[kk] = 0.5 * factor_spd(interference, "rates").log2det;
    r.rate[kk] = r.r1[kk] - r.r2[kk];
    r.power[kk] = p.mats[kk].trace();
    const double consumed = e.consumption(k, p.mats[kk]);
    r.ee[kk] = consumed > 0.0 ? r.rate[kk] / consumed : 0.0;
    r.sum_rate += r.rate[kk];
    r.total_consumption += consumed;
  }
  r.min_rate = *std::min_element(r.rate.begin(), r.rate.end());
  r.global_ee = r.total_consumption > 0.0 ? r.sum_rate / r.total_consumption : 0.0;
  return r;
}

}  // namespace hwigs
