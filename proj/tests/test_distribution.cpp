#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "drcc/distribution.hpp"
#include "support.hpp"

using namespace drcc;
using namespace drcc::testing;

namespace {

double moment_at(const DistributionFamily& fam, const std::vector<int>& beta, const std::vector<double>& a) {
  return poly_eval(fam.moment_polynomial(beta), embed_point(fam.space(), Block::param, a));
}

std::vector<double> random_param(const std::vector<Interval>& box, std::mt19937_64& rng) {
  std::vector<double> a;
  for (const auto& [lo, hi] : box) a.push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
  return a;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace

TEST(Distribution, GaussianUnivariateMatchesHermiteQuadrature) {
  VariableSpace s(1, 1, 2);
  const std::vector<Interval> box{{-1, 1}, {0.5, 1.5}};
  const auto fam = DistributionFamily::gaussian1d(s, make_box(s, Block::param, box));
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_param(box, rng);
    for (int b = 0; b <= 10; ++b) EXPECT_LT(rel_err(moment_at(fam, {b}, a), gaussian1d_moment(b, a[0], a[1])), 1e-9);
  }
}

TEST(Distribution, GaussianFixedMean) {
  VariableSpace s(1, 1, 1);
  const auto fam = DistributionFamily::gaussian1d(s, make_box(s, Block::param, {{0.4, 0.6}}), 0.3);
  for (double sg : {0.4, 0.5, 0.6})
    for (int b = 0; b <= 10; ++b) EXPECT_LT(rel_err(moment_at(fam, {b}, {sg}), gaussian1d_moment(b, 0.3, sg)), 1e-9);
  EXPECT_DOUBLE_EQ(fam.mean_at(std::vector<double>{0.5}), 0.3);
  EXPECT_DOUBLE_EQ(fam.sigma_at(std::vector<double>{0.5}), 0.5);
}

TEST(Distribution, GaussianMultivariateMatchesTensorQuadrature) {
  VariableSpace s(1, 2, 5);
  const std::vector<Interval> box{{-0.5, 0.5}, {-0.5, 0.5}, {0.5, 1.5}, {-0.2, 0.2}, {0.5, 1.5}};
  const auto fam = DistributionFamily::gaussian(s, make_box(s, Block::param, box));
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_param(box, rng);
    const std::vector<std::vector<double>> Sigma{{a[2], a[3]}, {a[3], a[4]}};
    for (int b1 = 0; b1 <= 10; ++b1)
      for (int b2 = 0; b1 + b2 <= 10; ++b2)
        EXPECT_LT(rel_err(moment_at(fam, {b1, b2}, a), gaussian_moment({b1, b2}, {a[0], a[1]}, Sigma)), 1e-9)
            << "beta " << b1 << "," << b2;
  }
}

TEST(Distribution, ExponentialMatchesLaguerreQuadrature) {
  VariableSpace s(1, 2, 2);
  const std::vector<Interval> box{{0.5, 2}, {0.5, 2}};
  const auto fam = DistributionFamily::exponential(s, make_box(s, Block::param, box));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_param(box, rng);
    for (int b1 = 0; b1 <= 10; ++b1)
      for (int b2 = 0; b1 + b2 <= 10; ++b2)
        EXPECT_LT(rel_err(moment_at(fam, {b1, b2}, a), exponential_moment({b1, b2}, a)), 1e-9);
  }
}

TEST(Distribution, PoissonMatchesSeriesSum) {
  VariableSpace s(1, 1, 1);
  const std::vector<Interval> box{{0.5, 5}};
  const auto fam = DistributionFamily::poisson(s, make_box(s, Block::param, box));
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_param(box, rng);
    for (int b = 0; b <= 10; ++b) EXPECT_LT(rel_err(moment_at(fam, {b}, a), poisson_moment(b, a[0])), 1e-9);
  }
  // p_2 = a^2 + a
  EXPECT_LT(fam.moment_polynomial(std::vector<int>{2}).distance(Polynomial::variable(s, Block::param, 0).pow(2) +
                                                                   Polynomial::variable(s, Block::param, 0)),
            1e-14);
}

TEST(Distribution, BinomialMatchesFiniteSum) {
  VariableSpace s(1, 1, 1);
  const std::vector<Interval> box{{0.05, 0.95}};
  const int N = 10;
  const auto fam = DistributionFamily::binomial(s, N, make_box(s, Block::param, box));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_param(box, rng);
    for (int b = 0; b <= 10; ++b) EXPECT_LT(rel_err(moment_at(fam, {b}, a), binomial_moment(b, N, a[0])), 1e-9);
  }
}

TEST(Distribution, BinomialSecondMomentIsNotTheVariance) {
  // E[omega^2] = N a (1 - a) + N^2 a^2; N a (1 - a) alone is the variance.
  VariableSpace s(1, 1, 1);
  const int N = 6;
  const auto fam = DistributionFamily::binomial(s, N, make_box(s, Block::param, {{0.1, 0.9}}));
  const double a = 0.3;
  const double got = moment_at(fam, {2}, {a});
  EXPECT_NEAR(got, N * a * (1 - a) + N * N * a * a, 1e-12);
  EXPECT_GT(std::abs(got - N * a * (1 - a)), 1.0);
}

TEST(Distribution, FiniteListInterpolatesComponentMoments) {
  VariableSpace s(1, 1, 1);
  VariableSpace g(1, 1, 2);
  auto c1 = std::make_shared<DistributionFamily>(
      DistributionFamily::gaussian1d(g, make_box(g, Block::param, {{0, 0}, {1, 1}})));
  auto c2 = std::make_shared<DistributionFamily>(
      DistributionFamily::gaussian1d(g, make_box(g, Block::param, {{1, 1}, {0.5, 0.5}})));
  auto c3 = std::make_shared<DistributionFamily>(
      DistributionFamily::gaussian1d(g, make_box(g, Block::param, {{-1, -1}, {2, 2}})));
  const auto fam = DistributionFamily::finite(s, {{c1, {0, 1}}, {c2, {1, 0.5}}, {c3, {-1, 2}}});
  for (int b = 0; b <= 6; ++b) {
    EXPECT_NEAR(moment_at(fam, {b}, {1.0}), gaussian1d_moment(b, 0, 1), 1e-9);
    EXPECT_NEAR(moment_at(fam, {b}, {2.0}), gaussian1d_moment(b, 1, 0.5), 1e-9);
    EXPECT_NEAR(moment_at(fam, {b}, {3.0}), gaussian1d_moment(b, -1, 2), 1e-7);
  }
}

TEST(Distribution, MomentTableLookup) {
  VariableSpace s(1, 1, 1);
  std::map<std::vector<int>, Polynomial> table;
  table[{1}] = Polynomial::variable(s, Block::param, 0);
  table[{2}] = Polynomial::constant(s, 1.0);
  const auto fam = DistributionFamily::moment_table(s, make_box(s, Block::param, {{0, 1}}), table);
  EXPECT_EQ(fam.max_moment_degree(), 2);
  EXPECT_THROW(fam.moment_polynomial(std::vector<int>{3}), Error);
  EXPECT_FALSE(fam.can_sample());
}

TEST(Distribution, BadArguments) {
  VariableSpace s(1, 1, 2);
  const auto fam = DistributionFamily::gaussian1d(s, make_box(s, Block::param, {{-1, 1}, {0.5, 1}}));
  EXPECT_THROW(fam.moment_polynomial(std::vector<int>{1, 1}), Error);
  EXPECT_THROW(fam.moment_polynomial(std::vector<int>{-1}), Error);
  EXPECT_THROW(fam.sample(std::vector<double>{0.0, 2.0}, 10, 1), Error);
  VariableSpace b(1, 1, 1);
  EXPECT_THROW(DistributionFamily::binomial(b, 0, make_box(b, Block::param, {{0.1, 0.9}})), Error);
}

TEST(Distribution, SamplingIsSeededAndUnbiased) {
  VariableSpace s(1, 1, 2);
  const auto fam = DistributionFamily::gaussian1d(s, make_box(s, Block::param, {{-1, 1}, {0.5, 1.5}}));
  const std::vector<double> a{0.3, 0.8};
  const auto x = fam.sample(a, 20000, 42), y = fam.sample(a, 20000, 42);
  ASSERT_EQ(x.size(), 20000u);
  double m = 0, m2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i].value, y[i].value);
    m += x[i].value[0];
    m2 += x[i].value[0] * x[i].value[0];
  }
  m /= x.size();
  m2 /= x.size();
  EXPECT_NEAR(m, 0.3, 0.03);
  EXPECT_NEAR(m2 - m * m, 0.64, 0.03);
}

TEST(Distribution, DeriveSeedSeparatesTasks) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
}

TEST(Distribution, GaussianTailProbability) {
  VariableSpace s(1, 1, 2);
  const auto fam = DistributionFamily::gaussian1d(s, make_box(s, Block::param, {{-1, 1}, {0.5, 1.5}}));
  const std::vector<double> a{0.0, 1.0};
  EXPECT_NEAR(fam.tail_probability(a, 0.0, INFINITY), 0.5, 1e-12);
  EXPECT_NEAR(fam.tail_probability(a, -1.0, 1.0), 0.682689492137, 1e-9);
}

// Integral over K_x = {omega >= x} of q_beta against N(m, s^2) vanishes for f = x - omega.
TEST(Distribution, StokesIdentityByAdaptiveQuadrature) {
  VariableSpace s(1, 1, 2);
  const Polynomial f = Polynomial::variable(s, Block::x, 0) - Polynomial::variable(s, Block::omega, 0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(-1, 1), um(-0.1, 0.1), us(0.8, 1.0);
  std::uniform_int_distribution<int> ub(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = ux(rng), m = um(rng), sg = us(rng);
    const int beta = ub(rng);
    const Polynomial q = stokes_polynomial(f, beta);
    auto integrand = [&](double w) {
      const double z = (w - m) / sg;
      const std::vector<double> pt{x, w, m, sg};
      return poly_eval(q, pt) * std::exp(-0.5 * z * z) / (sg * std::sqrt(2 * M_PI));
    };
    const double v = adaptive_simpson(integrand, x, m + 14 * sg, 1e-12);
    EXPECT_LT(std::abs(v), 1e-8) << "x " << x << " beta " << beta;
  }
}
