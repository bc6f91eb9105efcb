#include <gtest/gtest.h>

#include <cmath>

#include "drcc/oracle.hpp"
#include "support.hpp"

using namespace drcc;
using namespace drcc::testing;

namespace {

// Left end of {x : kappa(x) < eps} for Example 1 by bisection on the closed form.
double ex1_boundary(double eps) {
  const ProblemSpec p = example("ex1");
  auto kappa = [&](double x) { return kappa_closed_form(std::vector<double>{x}, p.f(), *p.family); };
  double lo = -1, hi = 1;
  for (int i = 0; i < 80; ++i) {
    const double m = 0.5 * (lo + hi);
    (kappa(m) < eps ? hi : lo) = m;
  }
  return 0.5 * (lo + hi);
}

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST(Oracle, ClosedFormMatchesHandComputation) {
  // kappa(x) = max over (m, s) of P(omega >= x) = 1 - Phi((x - m)/s), worst at m = 0.1 and s = 1 for x > 0.1.
  const ProblemSpec p = example("ex1");
  for (double x : {0.2, 0.5, 0.9}) {
    const double want = 1 - phi((x - 0.1) / 1.0);
    EXPECT_NEAR(kappa_closed_form(std::vector<double>{x}, p.f(), *p.family), want, 1e-12);
  }
  // For x < 0.1 the smallest deviation maximizes the tail.
  EXPECT_NEAR(kappa_closed_form(std::vector<double>{-0.5}, p.f(), *p.family), 1 - phi((-0.5 - 0.1) / 0.8), 1e-12);
}

TEST(Oracle, TrueFeasibleSetOfExampleOne) {
  const double l = ex1_boundary(0.3);
  EXPECT_NEAR(l, 0.6244, 0.002);
  const ProblemSpec p = example("ex1");
  const auto est = feasible_set_oracle(p, 0.3, 2001, 100, 0, 1);
  EXPECT_EQ(est.method, OracleMethod::closed_form);
  double first = 2;
  for (std::size_t i = 0; i < est.grid.size(); ++i)
    if (est.feasible[i]) first = std::min(first, est.grid[i][0]);
  EXPECT_NEAR(first, l, 1e-3);
  EXPECT_TRUE(est.feasible.back());
}

TEST(Oracle, MonteCarloAgreesWithClosedForm) {
  const ProblemSpec p = example("ex1");
  for (double x : {0.0, 0.4, 0.8}) {
    const std::vector<double> xv{x};
    const double exact = kappa_closed_form(xv, p.f(), *p.family);
    const double mc = kappa_grid_mc(xv, p, 5, 20000, 17);
    // Max over 25 parameters of a binomial proportion: small positive bias, 4 sigma noise band.
    EXPECT_NEAR(mc, exact, 4 * std::sqrt(0.25 / 20000) + 0.005);
  }
}

TEST(Oracle, ExactMassAgreesWithClosedFormOnAffineConstraint) {
  const ProblemSpec p = example("ex1");
  for (double x : {-0.7, 0.05, 0.6}) {
    const std::vector<double> xv{x};
    EXPECT_NEAR(kappa_exact(xv, p, 50), kappa_closed_form(xv, p.f(), *p.family), 1e-12);
  }
}

TEST(Oracle, SublevelIntervalsOfQuadratics) {
  auto iv = sublevel_intervals({-1, 0, 1});  // omega^2 - 1 <= 0
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(iv[0].first, -1, 1e-12);
  EXPECT_NEAR(iv[0].second, 1, 1e-12);
  iv = sublevel_intervals({1, 0, -1});  // 1 - omega^2 <= 0
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_TRUE(std::isinf(iv[0].first));
  EXPECT_NEAR(iv[0].second, -1, 1e-12);
  EXPECT_NEAR(iv[1].first, 1, 1e-12);
  EXPECT_TRUE(std::isinf(iv[1].second));
  EXPECT_TRUE(sublevel_intervals({1}).empty());
  EXPECT_EQ(sublevel_intervals({-1}).size(), 1u);
}

TEST(Oracle, BandRegionMass) {
  const ProblemSpec p = example("joint1");
  const std::vector<double> x{0.0};
  // Outside (-2, 2) under N(0, 1).
  EXPECT_NEAR(gaussian_region_mass(p.f_list, x, 0.0, 1.0), 2 * (1 - phi(2.0)), 1e-12);
}

TEST(Oracle, JointKappaIsUnionOverConstraints) {
  const ProblemSpec p = example("joint1");
  const std::vector<double> x{0.5};
  const double k = kappa_exact(x, p, 100);
  double single = 0;
  for (const auto& f : p.f_list) single = std::max(single, gaussian_region_mass({f}, x, 0.1, 1.0));
  EXPECT_GE(k, single - 1e-12);
}

TEST(Oracle, BoxGridIncludesEndpoints) {
  VariableSpace s(2, 1, 0);
  const auto g = box_grid(make_box(s, Block::x, {{-1, 1}, {0, 2}}), 3);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_DOUBLE_EQ(g.front()[0], -1);
  EXPECT_DOUBLE_EQ(g.front()[1], 0);
  EXPECT_DOUBLE_EQ(g.back()[0], 1);
  EXPECT_DOUBLE_EQ(g.back()[1], 2);
}

TEST(Oracle, ZeroSamplesRejected) {
  const ProblemSpec p = example("ex1");
  EXPECT_THROW(kappa_grid_mc(std::vector<double>{0.0}, p, 3, 0, 1), Error);
}

TEST(Oracle, MonteCarloIsReproducible) {
  const ProblemSpec p = example("ex1");
  const auto a = feasible_set_oracle(p, 0.3, 11, 4, 200, 5, true);
  const auto b = feasible_set_oracle(p, 0.3, 11, 4, 200, 5, true);
  EXPECT_EQ(a.method, OracleMethod::grid_mc);
  EXPECT_EQ(a.kappa_hat, b.kappa_hat);
  const auto c = feasible_set_oracle(p, 0.3, 11, 4, 200, 6, true);
  EXPECT_NE(a.kappa_hat, c.kappa_hat);
}

TEST(Oracle, ClosedFormAvailability) {
  EXPECT_TRUE(closed_form_available(example("ex1")));
  EXPECT_TRUE(closed_form_available(example("ex3")));
  EXPECT_FALSE(closed_form_available(example("momentbox1")));
}

TEST(Oracle, EpsilonSweepReusesKappa) {
  const ProblemSpec p = example("ex1");
  const auto est = feasible_set_oracle(p, 0.3, 21, 10, 0, 1);
  const auto tight = with_epsilon(est, 0.05);
  EXPECT_EQ(tight.kappa_hat, est.kappa_hat);
  EXPECT_LE(tight.feasible_count(), est.feasible_count());
  for (std::size_t i = 0; i < est.grid.size(); ++i) EXPECT_EQ(tight.feasible[i], est.kappa_hat[i] < 0.05);
}

TEST(Oracle, CompareCountsAndEmptyInnerSet) {
  const ProblemSpec p = example("ex1");
  const auto est = feasible_set_oracle(p, 0.3, 101, 10, 0, 1);
  InnerApproximation empty{Polynomial::constant(p.space, 1.0), 0.3, 2, p.X};
  const auto rep = compare(empty, est);
  EXPECT_EQ(rep.inner_count, 0);
  EXPECT_DOUBLE_EQ(rep.coverage_ratio, 0.0);
  EXPECT_EQ(rep.violations, 0);
  InnerApproximation all{Polynomial::constant(p.space, 0.0), 0.3, 2, p.X};
  const auto full = compare(all, est);
  EXPECT_EQ(full.inner_count, 101);
  EXPECT_DOUBLE_EQ(full.coverage_ratio, 1.0);
  EXPECT_EQ(full.violations, 101 - static_cast<int>(est.feasible_count()));
}

TEST(Oracle, CompareRejectsDimensionMismatch) {
  const ProblemSpec p = example("ex1");
  const auto est = feasible_set_oracle(example("ex2"), 0.1, 5, 3, 0, 1);
  InnerApproximation inner{Polynomial::constant(p.space, 0.0), 0.3, 2, p.X};
  EXPECT_THROW(compare(inner, est), Error);
}
