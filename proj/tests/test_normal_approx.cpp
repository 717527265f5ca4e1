#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "steinlab/models.hpp"
#include "steinlab/normal_approx.hpp"
#include "test_support.hpp"

using namespace steinlab;

TEST(DWExact, Examples) {
  auto po = poisson_pmf(4.0, {1e-15});
  auto m = moments(po);
  EXPECT_NEAR(d_w_exact(unit_shift_coupling(po), m.mean, m.variance), 0.0, 1e-12);

  for (double q : {0.1, 0.4, 0.8}) {
    auto be = bernoulli(q);
    EXPECT_NEAR(d_w_exact(independent_coupling(be), q, q * (1 - q)), 2 * q, 1e-14);
  }

  auto d = make_pmf({0.2, 0.1, 0.4, 0.3});
  auto dm = moments(d);
  const double e_star = moments(size_bias(d)).mean;
  double oracle = 0.0;
  for (std::size_t y = 0; y < d.size(); ++y)
    oracle += d[y] * std::abs(1 - dm.mean / dm.variance * (e_star - static_cast<double>(y)));
  EXPECT_NEAR(d_w_exact(independent_coupling(d), dm.mean, dm.variance), oracle, 1e-14);
  EXPECT_THROW(d_w_exact(independent_coupling(d), 1.0, 0.0), InputError);
}

TEST(NormalBound, Examples) {
  NormalBoundInputs in;
  in.var_w = 25;
  in.d_w = 0.0;
  in.c = 1;
  in.mu = 25;
  in.sigma = 5;
  EXPECT_NEAR(normal_bound(in).total, 0.364, 1e-12);
  EXPECT_TRUE(std::isnan(normal_bound(in).lambda_used));

  in.d_w = 0.3;
  in.c = 2;
  in.mu = 12;
  const double s3 = 125.0;
  EXPECT_NEAR(normal_bound(in).total, 0.3 + 0.82 * 4 * 12 / s3 + 2.0 / 5.0, 1e-12);

  // A zero-variance component's D value is ignored.
  in.d_x = 1e6;
  EXPECT_EQ(normal_bound(in).term("x_discrepancy"), 0.0);

  in.sigma = 6;
  EXPECT_THROW(normal_bound(in), InputError);
  in.sigma = 5;
  in.p = 0.0;
  EXPECT_THROW(normal_bound(in), InputError);
}

TEST(LightbulbBound, Examples) {
  auto b = lightbulb_bound(100, 0, 0.2, 25.0);
  EXPECT_NEAR(b.total, 1.822, 1e-12);
  EXPECT_NEAR(b.term("w_discrepancy"), 0.11, 1e-12);
  EXPECT_NEAR(b.term("coupling_smooth"), 1.312, 1e-12);

  const double tau400 = moments(lightbulb_exact(400)).variance;
  EXPECT_NEAR(tau400, 100.0, 1e-6);
  EXPECT_NEAR(lightbulb_bound(400, 0, 0.3, tau400).total, 0.9085, 1e-5);

  const double k0 = lightbulb_bound(100, 10, 0.0, 25.0).total;
  EXPECT_NEAR(lightbulb_bound(100, 10, 1e-9, 25.0).total, k0, 1e-6);
  EXPECT_NEAR(k0, 1.822, 1e-12);

  EXPECT_THROW(lightbulb_bound(101, 0, 0.2, 25.0), InputError);
  EXPECT_THROW(lightbulb_bound(100, 0, 1.0, 25.0), InputError);
  EXPECT_THROW(lightbulb_bound(100, 0, 0.2, 0.0), InputError);
}

TEST(LightbulbComposition, TermsAtWorkedPoint) {
  const double tau = moments(lightbulb_exact(100)).variance;
  auto c = lightbulb_composition(100, 25, 0.2, tau);
  auto p = lightbulb_bound(100, 25, 0.2, tau);
  const double s2 = tau + 4.0, s3 = s2 * std::sqrt(s2);
  EXPECT_NEAR(c.term("w_discrepancy"), 0.0948, 5e-5);
  EXPECT_NEAR(c.term("x_discrepancy"), 0.0138, 5e-5);
  EXPECT_NEAR(c.term("coupling_gap"), 0.3714, 5e-5);
  // The theorem uses mu = E Y = 55; the displayed formula has n/2 = 50 in its place.
  EXPECT_NEAR(c.term("coupling_smooth"), 0.82 * 4 * 55 / s3, 1e-12);
  EXPECT_NEAR(p.term("coupling_smooth"), 1.0499, 5e-4);
  EXPECT_NEAR(c.term("contamination"), 0.2 * 625 / s2, 1e-12);
  EXPECT_NEAR(p.term("contamination"), 0.2 * 625 * 100 / (s2 * 110), 1e-12);
  EXPECT_NEAR(p.term("contamination"), p.p_used * c.term("contamination"), 1e-12);
}

// ---------------------------------------------------------------------------
// Properties

TEST(NormalProperties, DeterministicShiftGivesClosedForm) {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 100; ++i) {
    auto d = test::random_pmf(gen, 10);
    const std::size_t c = 1 + i % 3;
    std::vector<double> joint(d.size() * (d.size() + c), 0.0);
    for (std::size_t y = 0; y < d.size(); ++y) joint[y * (d.size() + c) + y + c] = d[y];
    SizeBiasCoupling cp(d.size(), d.size() + c, joint);
    const double mu = u(gen), var = u(gen);
    EXPECT_NEAR(d_w_exact(cp, mu, var), std::abs(1 - c * mu / var), 1e-12);
  }
}

TEST(NormalProperties, MonotoneInEachInput) {
  std::mt19937_64 gen(62);
  std::uniform_real_distribution<double> u(0.01, 3.0), up(0.05, 1.0);
  for (int i = 0; i < 200; ++i) {
    NormalBoundInputs in;
    in.var_w = u(gen);
    in.var_x = u(gen);
    in.d_w = u(gen);
    in.d_x = u(gen);
    in.c = u(gen);
    in.a = u(gen);
    in.mu = u(gen);
    in.sigma = std::sqrt(in.var_w + in.var_x);
    in.p = up(gen);
    const double base = normal_bound(in).total;
    for (double NormalBoundInputs::*f : {&NormalBoundInputs::d_w, &NormalBoundInputs::d_x, &NormalBoundInputs::c,
                                          &NormalBoundInputs::a}) {
      auto bumped = in;
      bumped.*f += u(gen);
      EXPECT_GE(normal_bound(bumped).total, base);
    }
  }
}

TEST(NormalProperties, LightbulbDominance) {
  for (std::size_t n : {10, 50, 100}) {
    auto w = lightbulb_exact(n);
    const double tau = moments(w).variance;
    for (auto [k, alpha] : {std::pair<std::size_t, double>{0, 0.0}, {25, 0.2}}) {
      auto y = convolve(w, binomial(k, alpha));
      auto m = moments(y);
      const double dk = kolmogorov_to_std_normal(y, m.mean, std::sqrt(m.variance));
      EXPECT_LE(dk, std::min(1.0, lightbulb_bound(n, k, alpha, tau).total) + 1e-9) << n;
      EXPECT_LE(dk, std::min(1.0, lightbulb_composition(n, k, alpha, tau).total) + 1e-9) << n;
    }
  }
}
