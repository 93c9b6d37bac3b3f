#include "hwigs/errors.hpp"
#include "hwigs/network.hpp"
#include "hwigs_cli/cli.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace hwigs {
namespace {

using oracle::cd;

TEST(DrawScenario, Deterministic) {
  const auto a = oracle::scenario(3, 2, 2, 10.0, 99);
  const auto b = oracle::scenario(3, 2, 2, 10.0, 99);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i) EXPECT_EQ(a.channels[k][i], b.channels[k][i]);
  const auto c = oracle::scenario(3, 2, 2, 10.0, 100);
  EXPECT_NE(a.channels[0][0], c.channels[0][0]);
}

TEST(DrawScenario, UnitVarianceEntries) {
  const auto s = oracle::scenario(10, 10, 10, 10.0, 5);  // 10^4 entries
  double sum = 0.0, re2 = 0.0, im2 = 0.0;
  int n = 0;
  for (const auto& row : s.channels)
    for (const auto& h : row)
      for (Eigen::Index i = 0; i < h.size(); ++i) {
        sum += std::norm(h(i));
        re2 += h(i).real() * h(i).real();
        im2 += h(i).imag() * h(i).imag();
        ++n;
      }
  EXPECT_EQ(n, 10000);
  EXPECT_NEAR(sum / n, 1.0, 0.05);
  EXPECT_NEAR(re2 / n, 0.5, 0.05);
  EXPECT_NEAR(im2 / n, 0.5, 0.05);
}

TEST(DrawScenario, SingleUserShape) {
  const auto s = oracle::scenario(1, 1, 1, 0.0, 1);
  ASSERT_EQ(s.channels.size(), 1u);
  ASSERT_EQ(s.channels[0].size(), 1u);
  EXPECT_EQ(s.channels[0][0].rows(), 1);
  EXPECT_EQ(s.power_budget, std::vector<double>{1.0});
}

TEST(DrawScenario, BudgetFollowsSnr) {
  ScenarioParams p;
  p.snr_db = 20.0;
  p.sigma2_rx = 2.0;
  EXPECT_DOUBLE_EQ(p.power_budget(), 200.0);
}

TEST(Scenario, ValidationErrors) {
  auto s = oracle::scenario(2, 1, 1, 10.0, 3);
  s.distortion.sigma2_rx = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = oracle::scenario(2, 1, 1, 10.0, 3);
  s.channels[0][1] = ComplexMat::Zero(2, 1);
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = oracle::scenario(2, 1, 1, 10.0, 3);
  s.power_budget[1] = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = oracle::scenario(2, 1, 1, 10.0, 3);
  s.eta.pop_back();
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(BuildEffective, IdealNoiseIsHalfSigmaR) {
  auto params = oracle::ideal_params(3, 2, 2, 10.0);
  params.sigma2_rx = 1.7;
  const auto e = build_effective(draw_scenario(params, 4));
  for (const RealMat& c : e.noise_cov) EXPECT_LE((c - 0.85 * RealMat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildEffective, ScalarDistortionHandEvaluation) {
  NetworkScenario s = oracle::scenario(1, 1, 1, 10.0, 8);
  s.rx_imb = ImbalanceParams::ideal();
  s.distortion = {0.2, 1.0};
  const double h2 = std::norm(s.channels[0][0](0, 0));
  const auto e = build_effective(s);
  EXPECT_LE((e.noise_cov[0] - 0.5 * (h2 * 0.2 + 1.0) * RealMat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

// Sample covariance of z_k = G1 (sum_i H_ki d_i + d_R) + G2 (...)^* with
// d_i ~ CN(0, s_T I), d_R ~ CN(0, s_R I).
TEST(BuildEffective, NoiseCovarianceMonteCarlo) {
  constexpr int kDraws = 100000;
  const NetworkScenario s = oracle::scenario(2, 2, 2, 10.0, 31);
  const auto e = build_effective(s);
  const auto [g1, g2] = oracle::imbalance(s.rx_imb.amplitude[0], s.rx_imb.phase[0], 2);
  std::mt19937_64 rng(32);
  std::normal_distribution<double> dt(0.0, std::sqrt(0.5 * s.distortion.sigma2_tx));
  std::normal_distribution<double> dr(0.0, std::sqrt(0.5 * s.distortion.sigma2_rx));
  const int k = 1;
  RealMat m2 = RealMat::Zero(4, 4), m4 = RealMat::Zero(4, 4);
  for (int t = 0; t < kDraws; ++t) {
    Eigen::VectorXcd y(2);
    for (int j = 0; j < 2; ++j) y(j) = cd(dr(rng), dr(rng));
    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXcd d(2);
      for (int j = 0; j < 2; ++j) d(j) = cd(dt(rng), dt(rng));
      y += s.channels[k][i] * d;
    }
    const Eigen::VectorXd z = oracle::stack(g1 * y + g2 * y.conjugate());
    const RealMat zz = z * z.transpose();
    m2 += zz;
    m4 += zz.cwiseProduct(zz);
  }
  m2 /= kDraws;
  m4 /= kDraws;
  const RealMat se = ((m4 - m2.cwiseProduct(m2)) / kDraws).cwiseSqrt();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_LE(std::abs(e.noise_cov[k](i, j) - m2(i, j)), 3.0 * se(i, j)) << i << "," << j;
}

TEST(BuildEffective, NoiseCovarianceSymmetricPsd) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto e = build_effective(oracle::scenario(3, 1 + seed % 3, 1 + (seed / 3) % 3, 10.0, seed));
    for (const RealMat& c : e.noise_cov) {
      EXPECT_LE(symmetry_residual(c), 1e-12);
      EXPECT_GE(min_eigenvalue(c), -1e-10);
    }
  }
}

TEST(Rates, ZeroPowerGivesZeroRates) {
  const auto e = build_effective(oracle::scenario(3, 2, 2, 10.0, 6));
  const auto r = rates(e, CovarianceSet::uniform(3, 2, 0.0, Signaling::IGS));
  for (double x : r.rate) EXPECT_NEAR(x, 0.0, 1e-14);
  EXPECT_NEAR(r.global_ee, 0.0, 1e-14);
}

TEST(Rates, ScalarAwgnCapacity) {
  const auto s = draw_scenario(oracle::ideal_params(1, 1, 1, 7.0), 12);
  const auto e = build_effective(s);
  for (double p : {0.1, 1.0, 5.0}) {
    const auto r = rates(e, CovarianceSet::uniform(1, 1, 0.5 * p, Signaling::PGS));
    EXPECT_NEAR(r.rate[0], std::log2(1.0 + p * std::norm(s.channels[0][0](0, 0)) / 1.0), 1e-10);
    EXPECT_NEAR(r.power[0], p, 1e-15);
  }
}

TEST(Rates, MimoCapacityMatchesComplexFormula) {
  auto params = oracle::ideal_params(1, 2, 3, 10.0);
  params.sigma2_rx = 0.7;
  const auto s = draw_scenario(params, 13);
  const auto e = build_effective(s);
  std::mt19937_64 rng(14);
  const ComplexMat a = oracle::random_complex(2, 2, rng);
  const ComplexMat q = a * a.adjoint();
  CovarianceSet p{Signaling::PGS, {realify_covariance(q)}};
  const ComplexMat h = s.channels[0][0];
  const ComplexMat m = ComplexMat::Identity(3, 3) + h * q * h.adjoint() / 0.7;
  const double expected = std::log2(m.determinant().real());
  EXPECT_NEAR(rates(e, p).rate[0], expected, 1e-10);
}

TEST(Rates, DecompositionAndGlobalEeConsistency) {
  const auto s = oracle::scenario(3, 2, 2, 10.0, 15);
  const auto e = build_effective(s);
  std::mt19937_64 rng(16);
  const auto p = cli::random_feasible(e, Signaling::IGS, rng);
  const auto r = rates(e, p);
  double sum = 0.0, power = 0.0, lo = 1e300;
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(r.rate[k], r.r1[k] - r.r2[k], 1e-12);
    EXPECT_GE(r.rate[k], -1e-9);
    EXPECT_NEAR(r.ee[k], r.rate[k] / (s.eta[k] * p.mats[k].trace() + s.p_static[k]), 1e-12);
    sum += r.rate[k];
    power += s.eta[k] * p.mats[k].trace() + s.p_static[k];
    lo = std::min(lo, r.rate[k]);
  }
  EXPECT_NEAR(r.sum_rate, sum, 1e-12);
  EXPECT_NEAR(r.min_rate, lo, 1e-15);
  EXPECT_NEAR(r.global_ee, r.sum_rate / r.total_consumption, 1e-12);
  EXPECT_NEAR(r.global_ee, sum / power, 1e-12);
}

TEST(Rates, OwnSignalMonotone) {
  const auto e = build_effective(oracle::scenario(2, 2, 2, 10.0, 17));
  std::mt19937_64 rng(18);
  for (int t = 0; t < 20; ++t) {
    auto p = cli::random_feasible(e, Signaling::IGS, rng);
    const double before = rates(e, p).r1[0];
    p.mats[0] += 0.1 * oracle::random_psd(4, rng);
    EXPECT_GE(rates(e, p).r1[0], before - 1e-12);
  }
}

TEST(Rates, NoCrossLinksDecouplesUsers) {
  const auto e = build_effective(oracle::without_cross_links(oracle::scenario(3, 2, 2, 10.0, 19)));
  std::mt19937_64 rng(20);
  auto p = cli::random_feasible(e, Signaling::IGS, rng);
  const double r0 = rates(e, p).rate[0];
  for (int t = 0; t < 10; ++t) {
    auto q = cli::random_feasible(e, Signaling::IGS, rng);
    q.mats[0] = p.mats[0];
    EXPECT_NEAR(rates(e, q).rate[0], r0, 1e-12);
  }
}

TEST(Rates, RejectsWrongCount) {
  const auto e = build_effective(oracle::scenario(2, 1, 1, 10.0, 21));
  EXPECT_THROW(rates(e, CovarianceSet::uniform(3, 1, 0.1, Signaling::IGS)), InvalidArgument);
}

TEST(FactorSpd, RejectsIllConditioned) {
  RealMat m = RealMat::Identity(2, 2);
  m(1, 1) = 1e-14;
  EXPECT_THROW(factor_spd(m, "test"), NumericalError);
  m(1, 1) = -1.0;
  EXPECT_THROW(factor_spd(m, "test"), NumericalError);
  m(1, 1) = 4.0;
  EXPECT_NEAR(factor_spd(m, "test").log2det, 2.0, 1e-15);
}

TEST(WithoutImbalance, KeepsChannelsAndDistortion) {
  const auto s = oracle::scenario(2, 2, 2, 10.0, 22);
  const auto t = without_imbalance(s);
  EXPECT_TRUE(t.tx_imb.is_ideal());
  EXPECT_TRUE(t.rx_imb.is_ideal());
  EXPECT_EQ(t.distortion.sigma2_tx, s.distortion.sigma2_tx);
  EXPECT_EQ(t.channels[1][0], s.channels[1][0]);
}

}  // namespace
}  // namespace hwigs
