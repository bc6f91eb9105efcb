#include <gtest/gtest.h>

#include <cmath>

#include "drcc/certificate.hpp"
#include "drcc/oracle.hpp"
#include "support.hpp"

using namespace drcc;
using namespace drcc::testing;

namespace {

ProblemSpec ex1_with(Variant v) {
  ProblemSpec p = example("ex1");
  p.variant = v;
  return p;
}

ProblemSpec ex1_constant_f(double c) {
  ProblemSpec p = ex1_with(Variant::base);
  p.f_list = {Polynomial::constant(p.space, c)};
  return p;
}

}  // namespace

TEST(Certificate, NegativeConstantConstraintIsAlwaysViolated) {
  for (int d : {1, 2, 3}) {
    const auto r = solve(build_base(ex1_constant_f(-1.0), d));
    ASSERT_TRUE(r.usable());
    EXPECT_NEAR(r.rho_d, 1.0, 1e-6) << "order " << d;
  }
}

TEST(Certificate, PositiveConstantConstraintIsNeverViolated) {
  for (int d : {1, 2, 3}) {
    const auto r = solve(build_base(ex1_constant_f(1.0), d));
    ASSERT_TRUE(r.usable());
    EXPECT_NEAR(r.rho_d, 0.0, 1e-6) << "order " << d;
  }
}

TEST(Certificate, BaseHierarchyIsMonotone) {
  const ProblemSpec p = ex1_with(Variant::base);
  double prev = 2;
  for (int d = 1; d <= 4; ++d) {
    const auto r = solve(build_base(p, d));
    ASSERT_TRUE(r.usable());
    EXPECT_LE(r.rho_d, prev + 1e-7) << "order " << d;
    EXPECT_GE(r.rho_d, -1e-7);
    prev = r.rho_d;
  }
}

TEST(Certificate, StokesIsNoWorseThanBase) {
  const ProblemSpec p = ex1_with(Variant::stokes);
  for (int d : {1, 2, 3}) {
    const auto b = solve(build_base(p, d));
    const auto s = solve(build_stokes(p, d));
    ASSERT_TRUE(b.usable() && s.usable());
    EXPECT_LE(s.rho_d, b.rho_d + 1e-7) << "order " << d;
  }
}

TEST(Certificate, DualValueEqualsIntegralOfW) {
  const auto r = solve(build_stokes(ex1_with(Variant::stokes), 3));
  ASSERT_TRUE(r.usable());
  EXPECT_NEAR(r.integral_w, r.rho_d, 1e-6);
  // Same integral from the physical-coordinate polynomial against uniform measure on [-1, 1].
  const InnerApproximation inner = extract_inner(r, 0.3, example("ex1").X);
  auto w = [&](double x) { return inner.value(std::span<const double>(&x, 1)); };
  EXPECT_NEAR(0.5 * adaptive_simpson(w, -1, 1, 1e-12), r.rho_d, 1e-6);
}

TEST(Certificate, WDominatesKappaOnTheGrid) {
  const ProblemSpec p = ex1_with(Variant::stokes);
  const auto r = solve(build_stokes(p, 3));
  ASSERT_TRUE(r.usable());
  const auto inner = extract_inner(r, 0.3, p.X);
  std::vector<std::pair<std::vector<double>, double>> vals;
  for (const auto& x : box_grid(p.X, 201)) vals.push_back({x, kappa_closed_form(x, p.f(), *p.family)});
  const auto rep = certify_pointwise(inner, vals);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_GE(rep.min_gap, -1e-4);
  EXPECT_EQ(rep.points, 201u);
}

TEST(Certificate, IntervalsOfKnownPolynomial) {
  VariableSpace s(1, 1, 0);
  const Polynomial x = Polynomial::variable(s, Block::x, 0);
  InnerApproximation inner{x * x, 0.25, 2, make_box(s, Block::x, {{-1, 1}})};
  const auto iv = extract_intervals(inner, -1, 1);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(iv[0].first, -0.5, 1e-6);
  EXPECT_NEAR(iv[0].second, 0.5, 1e-6);
  inner.w = Polynomial::constant(s, 1) - x * x;
  inner.epsilon = 0.75;
  const auto two = extract_intervals(inner, -1, 1);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NEAR(two[0].first, -1.0, 1e-12);
  EXPECT_NEAR(two[0].second, -0.5, 1e-6);
  EXPECT_NEAR(two[1].first, 0.5, 1e-6);
  EXPECT_NEAR(two[1].second, 1.0, 1e-12);
}

TEST(Certificate, MembershipRequiresX) {
  VariableSpace s(1, 1, 0);
  InnerApproximation inner{Polynomial::constant(s, 0.0), 0.1, 2, make_box(s, Block::x, {{-1, 1}})};
  const std::vector<double> in{0.0}, out{1.5};
  EXPECT_TRUE(inner.contains(in));
  EXPECT_FALSE(inner.contains(out));
}

TEST(Certificate, ExtractRejectsBadInput) {
  SolveResult r;
  r.status = SolverStatus::numerical_failure;
  EXPECT_THROW(extract_inner(r, 0.3, example("ex1").X), Error);
  r.status = SolverStatus::optimal;
  r.dual_w = Polynomial::constant(VariableSpace(1, 1, 2), 0.0);
  EXPECT_THROW(extract_inner(r, 1.5, example("ex1").X), Error);
}

TEST(Certificate, BaseInnerSetIsEmptyAtLowOrder) {
  const ProblemSpec p = ex1_with(Variant::base);
  const auto r = solve(build_base(p, 3));
  ASSERT_TRUE(r.usable());
  EXPECT_TRUE(extract_intervals(extract_inner(r, 0.3, p.X), -1, 1).empty());
}
