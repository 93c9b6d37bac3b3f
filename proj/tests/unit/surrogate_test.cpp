#include "hwigs/errors.hpp"
#include "hwigs/surrogate.hpp"
#include "hwigs_cli/cli.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace hwigs {
namespace {

TEST(LogdetMajorizer, TouchesAtReference) {
  std::mt19937_64 rng(51);
  const RealMat q = oracle::random_psd(4, rng, 0.1);
  EXPECT_NEAR(logdet_majorizer(q)(q), oracle::log2det(q), 1e-10);
}

TEST(LogdetMajorizer, IdentityReferenceHandEvaluation) {
  const auto bound = logdet_majorizer(RealMat::Identity(2, 2));
  const double value = bound(2.0 * RealMat::Identity(2, 2));
  EXPECT_NEAR(value, 2.0 / std::numbers::ln2, 1e-12);
  EXPECT_GE(value, 2.0);
}

TEST(LogdetMajorizer, UpperBoundOnRandomPairs) {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 500; ++t) {
    const Eigen::Index n = 2 + t % 5;
    const RealMat ref = oracle::random_psd(n, rng, 0.05);
    const RealMat q = oracle::random_psd(n, rng, 1e-3);
    EXPECT_GE(logdet_majorizer(ref)(q), oracle::log2det(q) - 1e-10);
  }
}

TEST(LogdetMajorizer, RejectsSingularReference) {
  RealMat m = RealMat::Identity(2, 2);
  m(1, 1) = 0.0;
  EXPECT_THROW(logdet_majorizer(m), NumericalError);
}

class SurrogateOnRandomNetworks : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    const int t = GetParam();
    e_ = build_effective(oracle::scenario(2 + t % 2, 1 + t % 2, 1 + (t / 2) % 2, 10.0, 500 + t));
    rng_.seed(600 + t);
  }
  EffectiveNetwork e_;
  std::mt19937_64 rng_;
};

TEST_P(SurrogateOnRandomNetworks, TouchesAtExpansion) {
  const auto at = cli::random_feasible(e_, Signaling::IGS, rng_);
  const auto s = build_surrogate(e_, at);
  const auto r = rates(e_, at);
  for (int k = 0; k < e_.users; ++k) {
    EXPECT_NEAR(surrogate_rate(s, e_, at.mats, k), r.rate[k], 1e-10);
    EXPECT_NEAR(s.const_terms[k], r.r2[k], 1e-12);
  }
}

TEST_P(SurrogateOnRandomNetworks, Minorizes) {
  const auto s = build_surrogate(e_, cli::random_feasible(e_, Signaling::IGS, rng_));
  for (int q = 0; q < 100; ++q) {
    const auto p = cli::random_feasible(e_, q % 2 ? Signaling::PGS : Signaling::IGS, rng_);
    const auto r = rates(e_, p);
    for (int k = 0; k < e_.users; ++k) EXPECT_LE(surrogate_rate(s, e_, p.mats, k), r.rate[k] + 1e-9);
  }
}

TEST_P(SurrogateOnRandomNetworks, InterferenceGradientMatchesFiniteDifferences) {
  const auto at = cli::random_feasible(e_, Signaling::IGS, rng_);
  const auto s = build_surrogate(e_, at);
  for (int k = 0; k < e_.users; ++k) {
    EXPECT_LE(s.grads[k][k].cwiseAbs().maxCoeff(), 0.0);
    for (int i = 0; i < e_.users; ++i) {
      EXPECT_LE(symmetry_residual(s.grads[k][i]), 1e-12);
      EXPECT_GE(min_eigenvalue(s.grads[k][i]), -1e-12);
    }
    const auto fn = [&](const Matrices& q) { return convex_part(e_, q, k); };
    EXPECT_LE(oracle::directional_gradient_error(fn, at.mats, s.grads[k], rng_), 1e-4);
  }
}

TEST_P(SurrogateOnRandomNetworks, SurrogateGradientMatchesFiniteDifferences) {
  const auto s = build_surrogate(e_, cli::random_feasible(e_, Signaling::IGS, rng_));
  const auto p = cli::random_feasible(e_, Signaling::IGS, rng_);
  for (int k = 0; k < e_.users; ++k) {
    Matrices g;
    surrogate_rate(s, e_, p.mats, k, &g);
    const auto fn = [&](const Matrices& q) { return surrogate_rate(s, e_, q, k); };
    EXPECT_LE(oracle::directional_gradient_error(fn, p.mats, g, rng_), 1e-4);
  }
}

TEST_P(SurrogateOnRandomNetworks, ExactGradientMatchesAtExpansion) {
  const auto at = cli::random_feasible(e_, Signaling::IGS, rng_);
  const auto s = build_surrogate(e_, at);
  for (int k = 0; k < e_.users; ++k) {
    Matrices gs, ge;
    surrogate_rate(s, e_, at.mats, k, &gs);
    exact_rate(e_, at.mats, k, &ge);
    for (int i = 0; i < e_.users; ++i) EXPECT_LE((gs[i] - ge[i]).norm(), 1e-10 * (1.0 + ge[i].norm()));
    const auto fn = [&](const Matrices& q) { return exact_rate(e_, q, k); };
    EXPECT_LE(oracle::directional_gradient_error(fn, at.mats, gs, rng_), 1e-4);
  }
}

TEST_P(SurrogateOnRandomNetworks, ConcaveAlongSegments) {
  const auto s = build_surrogate(e_, cli::random_feasible(e_, Signaling::IGS, rng_));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int q = 0; q < 30; ++q) {
    const auto a = cli::random_feasible(e_, Signaling::IGS, rng_);
    const auto b = cli::random_feasible(e_, Signaling::IGS, rng_);
    const double t = u(rng_);
    Matrices mid = a.mats;
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = t * a.mats[i] + (1.0 - t) * b.mats[i];
    for (int k = 0; k < e_.users; ++k) {
      EXPECT_GE(surrogate_rate(s, e_, mid, k),
                t * surrogate_rate(s, e_, a.mats, k) + (1.0 - t) * surrogate_rate(s, e_, b.mats, k) - 1e-9);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Instances, SurrogateOnRandomNetworks, ::testing::Range(0, 8));

TEST(Surrogate, SingleUserIsExact) {
  const auto e = build_effective(oracle::scenario(1, 2, 2, 10.0, 53));
  std::mt19937_64 rng(54);
  const auto s = build_surrogate(e, cli::random_feasible(e, Signaling::IGS, rng));
  EXPECT_LE(s.grads[0][0].cwiseAbs().maxCoeff(), 0.0);
  for (int q = 0; q < 20; ++q) {
    const auto p = cli::random_feasible(e, Signaling::IGS, rng);
    EXPECT_NEAR(surrogate_rate(s, e, p.mats, 0), rates(e, p).rate[0], 1e-12);
  }
}

TEST(Surrogate, ConcavePartGradient) {
  const auto e = build_effective(oracle::scenario(3, 2, 2, 10.0, 55));
  std::mt19937_64 rng(56);
  const auto p = cli::random_feasible(e, Signaling::IGS, rng);
  for (int k = 0; k < 3; ++k) {
    Matrices g;
    concave_part(e, p.mats, k, &g);
    const auto fn = [&](const Matrices& q) { return concave_part(e, q, k); };
    EXPECT_LE(oracle::directional_gradient_error(fn, p.mats, g, rng), 1e-4);
  }
}

}  // namespace
}  // namespace hwigs
