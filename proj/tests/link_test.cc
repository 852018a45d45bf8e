#include "neurallog/link.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "neurallog/errors.hpp"

namespace neurallog {
namespace {

TEST(LinkEval, Origin) {
  const LinkEval e = link_eval(0.0);
  EXPECT_DOUBLE_EQ(e.mu, 0.5);
  EXPECT_DOUBLE_EQ(e.dmu, 0.25);
  EXPECT_DOUBLE_EQ(e.ddmu, 0.0);
}

TEST(LinkEval, SaturatesAtTwenty) {
  const long double oracle = 1.0L / (1.0L + std::exp(-20.0L));
  const LinkEval e = link_eval(20.0);
  EXPECT_NEAR(e.mu, 1.0, 1e-8);
  EXPECT_NEAR(e.mu, static_cast<double>(oracle), 1e-15);
  EXPECT_NEAR(e.dmu, 0.0, 1e-8);
  EXPECT_NEAR(e.dmu, static_cast<double>(oracle * (1.0L - oracle)), 1e-18);
}

TEST(LinkEval, Antisymmetry) {
  for (double z : {0.1, 1.0, 3.7, 12.0, 40.0}) {
    const LinkEval a = link_eval(z);
    const LinkEval b = link_eval(-z);
    EXPECT_NEAR(a.mu + b.mu, 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(a.dmu, b.dmu);
    EXPECT_NEAR(a.ddmu, -b.ddmu, 1e-18);
  }
}

TEST(LinkEval, StableAtExtremes) {
  for (double z : {-700.0, -300.0, 300.0, 700.0}) {
    const LinkEval e = link_eval(z);
    EXPECT_TRUE(std::isfinite(e.mu));
    EXPECT_TRUE(std::isfinite(e.dmu));
    EXPECT_TRUE(std::isfinite(e.ddmu));
    EXPECT_GE(e.mu, 0.0);
    EXPECT_LE(e.mu, 1.0);
  }
  EXPECT_TRUE(std::isfinite(log_sigmoid(-700.0)));
  EXPECT_NEAR(log_sigmoid(-700.0), -700.0, 1e-9);
}

TEST(LinkEval, RejectsNonFinite) {
  EXPECT_THROW(link_eval(std::nan("")), std::domain_error);
  EXPECT_THROW(link_eval(INFINITY), std::domain_error);
}

TEST(LinkEval, InvariantsAndFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-30.0, 30.0);
  const double h = 1e-5;
  for (int i = 0; i < 100000; ++i) {
    const double z = unif(rng);
    const LinkEval e = link_eval(z);
    ASSERT_GT(e.dmu, 0.0);
    ASSERT_LE(e.dmu, 0.25);
    ASSERT_LE(std::fabs(e.ddmu), e.dmu);
    ASSERT_NEAR(e.dmu, e.mu * (1.0 - e.mu), 1e-15);
    // Skip the far tails where the central difference is rounding noise.
    if (e.dmu > 1e-9) {
      // mu(z + h) - mu(z - h) equals mu(-z + h) - mu(-z - h); evaluating it on
      // the negative side avoids cancellation against 1.
      const double zn = -std::fabs(z);
      const double fd_mu = (sigmoid(zn + h) - sigmoid(zn - h)) / (2 * h);
      ASSERT_NEAR(fd_mu, e.dmu, 1e-6 * e.dmu) << "z=" << z;
      const double fd_dmu = (sigmoid_derivative(z + h) - sigmoid_derivative(z - h)) / (2 * h);
      if (std::fabs(e.ddmu) > 1e-6 * e.dmu) {
        ASSERT_NEAR(fd_dmu, e.ddmu, 1e-6 * e.dmu + 1e-6 * std::fabs(e.ddmu)) << "z=" << z;
      }
    }
  }
}

TEST(KappaForBound, Zero) {
  const KappaR k = kappa_for_bound(0.0);
  EXPECT_DOUBLE_EQ(k.kappa, 4.0);
  EXPECT_DOUBLE_EQ(k.R, 0.25);
}

TEST(KappaForBound, FiveMatchesClosedForm) {
  // 1 / (mu(5) (1 - mu(5))) = 2 + 2 cosh(5) = 150.4199...
  const long double oracle = 2.0L + 2.0L * std::cosh(5.0L);
  EXPECT_NEAR(kappa_for_bound(5.0).kappa, static_cast<double>(oracle), 1e-9);
  EXPECT_NEAR(kappa_for_bound(5.0).kappa, 150.42, 0.01);
}

TEST(KappaForBound, MonotoneAndInverse) {
  double prev = 0.0;
  for (double B = 0.0; B <= 30.0; B += 0.25) {
    const double k = kappa_for_bound(B).kappa;
    EXPECT_GT(k, prev);
    EXPECT_NEAR(k * sigmoid_derivative(B), 1.0, 1e-12);
    prev = k;
  }
}

TEST(KappaForBound, Errors) {
  EXPECT_THROW(kappa_for_bound(-1.0), InputError);
  try {
    kappa_for_bound(800.0);
    FAIL() << "expected an overflow error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("800"), std::string::npos);
  }
}

}  // namespace
}  // namespace neurallog
