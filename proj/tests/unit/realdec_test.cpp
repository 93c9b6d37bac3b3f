#include "hwigs/errors.hpp"
#include "hwigs/realdec.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

namespace hwigs {
namespace {

using oracle::cd;

double max_abs(const RealMat& m) { return m.cwiseAbs().maxCoeff(); }

TEST(Realify, ImaginaryUnit) {
  ComplexMat m(1, 1);
  m(0, 0) = cd(0.0, 1.0);
  RealMat expected(2, 2);
  expected << 0, -1, 1, 0;
  EXPECT_EQ(realify(m), expected);
}

TEST(Realify, IdentityMapsToIdentity) {
  EXPECT_EQ(realify(ComplexMat::Identity(3, 3)), RealMat::Identity(6, 6));
}

TEST(Realify, RectangularProduct) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const ComplexMat a = oracle::random_complex(2, 3, rng);
    const ComplexMat b = oracle::random_complex(3, 2, rng);
    EXPECT_LE(max_abs(realify(a * b) - realify(a) * realify(b)), 1e-12);
  }
}

TEST(Realify, RingHomomorphismOnSquareMatrices) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const ComplexMat a = oracle::random_complex(4, 4, rng);
    const ComplexMat b = oracle::random_complex(4, 4, rng);
    EXPECT_LE(max_abs(realify(a + b) - realify(a) - realify(b)), 1e-12);
    EXPECT_LE(max_abs(realify(a * b) - realify(a) * realify(b)), 1e-12);
  }
}

TEST(Realify, ComplexifyRoundTrip) {
  std::mt19937_64 rng(13);
  const ComplexMat a = oracle::random_complex(3, 2, rng);
  EXPECT_LE((complexify(realify(a)) - a).cwiseAbs().maxCoeff(), 0.0);
}

TEST(RealifyCovariance, ScaledIdentity) {
  EXPECT_LE(max_abs(realify_covariance(ComplexMat::Identity(3, 3)) - 0.5 * RealMat::Identity(6, 6)), 0.0);
}

TEST(RealifyCovariance, Zero) { EXPECT_EQ(realify_covariance(ComplexMat::Zero(2, 2)), RealMat::Zero(4, 4)); }

TEST(RealifyCovariance, Diagonal) {
  ComplexMat c = ComplexMat::Zero(2, 2);
  c(0, 0) = 2.0;
  c(1, 1) = 4.0;
  RealMat expected = RealMat::Zero(4, 4);
  expected.diagonal() << 1, 2, 1, 2;
  EXPECT_EQ(realify_covariance(c), expected);
}

TEST(RealifyCovariance, UnscaledMatchesRealify) {
  ComplexMat c = ComplexMat::Identity(2, 2);
  c(0, 1) = cd(0.3, 0.2);
  c(1, 0) = std::conj(c(0, 1));
  EXPECT_LE(max_abs(realify_covariance(c, false) - realify(c)), 1e-15);
}

TEST(RealifyCovariance, RejectsNonHermitian) {
  ComplexMat c = ComplexMat::Identity(2, 2);
  c(0, 1) = cd(0.0, 1e-9);
  EXPECT_THROW(realify_covariance(c), InvalidArgument);
  c(0, 1) = cd(0.0, 1e-11);
  EXPECT_NO_THROW(realify_covariance(c));
}

TEST(CappedSimplex, KktCases) {
  // cap inactive
  EXPECT_EQ(project_capped_simplex(std::vector<double>{0.5, 1.0}, 4.0), (std::vector<double>{0.5, 1.0}));
  // both active: shift by (8 - 4) / 2
  EXPECT_EQ(project_capped_simplex(std::vector<double>{4.0, 4.0}, 4.0), (std::vector<double>{2.0, 2.0}));
  // one coordinate driven to zero
  EXPECT_EQ(project_capped_simplex(std::vector<double>{5.0, 0.5}, 2.0), (std::vector<double>{2.0, 0.0}));
  // negative entries clipped first
  EXPECT_EQ(project_capped_simplex(std::vector<double>{-3.0, 1.0}, 2.0), (std::vector<double>{0.0, 1.0}));
}

TEST(CappedSimplex, OptimalAgainstRandomFeasiblePoints) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(5);
    for (double& x : v) x = g(rng);
    const double cap = 3.0 * u(rng);
    const auto p = project_capped_simplex(v, cap);
    double dist = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_GE(p[i], 0.0);
      sum += p[i];
      dist += (p[i] - v[i]) * (p[i] - v[i]);
    }
    EXPECT_LE(sum, cap + 1e-12);
    for (int q = 0; q < 200; ++q) {
      std::vector<double> y(5);
      double s = 0.0;
      for (double& x : y) s += (x = u(rng));
      const double scale = cap * u(rng) / s;
      double d = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) d += (y[i] * scale - v[i]) * (y[i] * scale - v[i]);
      EXPECT_LE(dist, d + 1e-12);
    }
  }
}

TEST(ProjectPsdTrace, FeasibleInputUnchanged) {
  std::mt19937_64 rng(15);
  RealMat m = oracle::random_psd(4, rng);
  m *= 2.0 / m.trace();
  EXPECT_LE(max_abs(project_psd_trace(m, 3.0) - m), 1e-12);
}

TEST(ProjectPsdTrace, NegativeEigenvalueClipped) {
  RealMat m = RealMat::Zero(2, 2);
  m.diagonal() << -1.0, 3.0;
  RealMat expected = RealMat::Zero(2, 2);
  expected(1, 1) = 3.0;
  EXPECT_LE(max_abs(project_psd_trace(m, 10.0) - expected), 1e-12);
}

TEST(ProjectPsdTrace, TraceCapBinds) {
  RealMat m = 4.0 * RealMat::Identity(2, 2);
  EXPECT_LE(max_abs(project_psd_trace(m, 4.0) - 2.0 * RealMat::Identity(2, 2)), 1e-12);
}

TEST(ProjectPsdTrace, FeasibleIdempotentAndNearest) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const RealMat m = 2.0 * oracle::random_symmetric(4, rng);
    const double cap = 0.5 + 3.0 * u(rng);
    const RealMat p = project_psd_trace(m, cap);
    EXPECT_GE(min_eigenvalue(p), -1e-10);
    EXPECT_LE(p.trace(), cap + 1e-10);
    EXPECT_LE(max_abs(project_psd_trace(p, cap) - p), 1e-10);
    const double dist = (p - m).norm();
    for (int q = 0; q < 1000; ++q) {
      RealMat y = oracle::random_psd(4, rng);
      y *= cap * u(rng) / y.trace();
      ASSERT_LE(dist, (y - m).norm() + 1e-12);
    }
  }
}

TEST(ProjectPsdTrace, RejectsNegativeCap) { EXPECT_THROW(project_psd_trace(RealMat::Identity(2, 2), -1.0), InvalidArgument); }

}  // namespace
}  // namespace hwigs
