#include "drcc/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace drcc {

std::string method_name(OracleMethod m) { return m == OracleMethod::closed_form ? "closed_form" : "grid_mc"; }

std::size_t OracleEstimate::feasible_count() const {
  return static_cast<std::size_t>(std::count(feasible.begin(), feasible.end(), true));
}

std::vector<double> omega_coefficients(const Polynomial& f, std::span<const double> x) {
  const VariableSpace& s = f.space();
  if (s.p() != 1) throw Error("omega_coefficients: univariate noise only");
  if (static_cast<int>(x.size()) != s.n()) throw Error("omega_coefficients: x dimension mismatch");
  const int w = s.offset(Block::omega);
  std::vector<double> c(f.degree_in(Block::omega) + 1, 0.0);
  for (const auto& [m, coef] : f.terms()) {
    if (m.degree_in(s, Block::param) > 0) throw Error("omega_coefficients: f must not involve a");
    double v = coef;
    for (int i = 0; i < s.n(); ++i)
      for (int e = 0; e < m.exps[i]; ++e) v *= x[i];
    c[m.exps[w]] += v;
  }
  return c;
}

std::vector<Interval> sublevel_intervals(const std::vector<double>& coeffs) {
  std::vector<double> c = coeffs;
  const double scale = std::max(1.0, std::abs(*std::max_element(c.begin(), c.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  })));
  while (c.size() > 1 && std::abs(c.back()) <= 1e-14 * scale) c.pop_back();
  const double inf = std::numeric_limits<double>::infinity();
  auto value = [&](double w) {
    double v = 0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * w + c[k];
    return v;
  };
  if (c.size() == 1) {
    if (c[0] <= 0) return {{-inf, inf}};
    return {};
  }
  std::vector<double> roots;
  const int D = static_cast<int>(c.size()) - 1;
  if (D == 1) {
    roots.push_back(-c[0] / c[1]);
  } else {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(D, D);
    for (int i = 1; i < D; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < D; ++i) C(i, D - 1) = -c[i] / c[D];
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    for (int i = 0; i < D; ++i) {
      const auto z = es.eigenvalues()(i);
      if (std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z.real()))) roots.push_back(z.real());
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> pts;
  pts.push_back(-inf);
  for (double r : roots) pts.push_back(r);
  pts.push_back(inf);
  std::vector<Interval> out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double lo = pts[i], hi = pts[i + 1];
    double mid;
    if (std::isinf(lo) && std::isinf(hi)) mid = 0;
    else if (std::isinf(lo)) mid = hi - 1;
    else if (std::isinf(hi)) mid = lo + 1;
    else mid = 0.5 * (lo + hi);
    if (value(mid) <= 0) {
      if (!out.empty() && out.back().second == lo)
        out.back().second = hi;
      else
        out.push_back({lo, hi});
    }
  }
  return out;
}

namespace {

double gaussian_interval_mass(double lo, double hi, double mean, double sigma) {
  const double zl = (lo - mean) / sigma, zh = (hi - mean) / sigma;
  if (zl > 0) return 0.5 * std::erfc(zl / std::sqrt(2.0)) - 0.5 * std::erfc(zh / std::sqrt(2.0));
  return normal_cdf(zh) - normal_cdf(zl);
}

std::vector<std::vector<double>> box_points(const std::vector<Interval>& box, int steps) {
  std::vector<std::vector<double>> pts{{}};
  for (auto [lo, hi] : box) {
    std::vector<std::vector<double>> next;
    for (const auto& p : pts) {
      for (int i = 0; i < steps; ++i) {
        auto q = p;
        q.push_back(steps == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (steps - 1));
        next.push_back(std::move(q));
      }
    }
    pts = std::move(next);
  }
  return pts;
}

std::vector<std::vector<double>> box_corners(const std::vector<Interval>& box) { return box_points(box, 2); }

bool affine_in_omega(const std::vector<Polynomial>& fs) {
  for (const auto& f : fs)
    if (f.degree_in(Block::omega) > 1) return false;
  return true;
}

}  // namespace

double gaussian_region_mass(const std::vector<Polynomial>& f_list, std::span<const double> x, double mean,
                            double sigma) {
  // Union of the sublevel sets, merged on a common sorted breakpoint list.
  std::vector<Interval> all;
  for (const auto& f : f_list) {
    auto iv = sublevel_intervals(omega_coefficients(f, x));
    all.insert(all.end(), iv.begin(), iv.end());
  }
  std::sort(all.begin(), all.end());
  double mass = 0;
  double cur_lo = 0, cur_hi = 0;
  bool open = false;
  for (auto [lo, hi] : all) {
    if (open && lo <= cur_hi) {
      cur_hi = std::max(cur_hi, hi);
      continue;
    }
    if (open) mass += gaussian_interval_mass(cur_lo, cur_hi, mean, sigma);
    cur_lo = lo;
    cur_hi = hi;
    open = true;
  }
  if (open) mass += gaussian_interval_mass(cur_lo, cur_hi, mean, sigma);
  return std::clamp(mass, 0.0, 1.0);
}

double kappa_closed_form(std::span<const double> x, const Polynomial& f, const DistributionFamily& family) {
  if (family.kind() != FamilyKind::GaussianUnivariate) throw Error("kappa_closed_form: univariate Gaussian only");
  if (!family.param_set().is_box()) throw Error("kappa_closed_form: A must be a box");
  if (f.degree_in(Block::omega) > 1) throw Error("kappa_closed_form: f must be affine in omega");
  const std::vector<double> c = omega_coefficients(f, x);
  const double b = c[0], slope = c.size() > 1 ? c[1] : 0.0;
  if (slope == 0.0) return b <= 0 ? 1.0 : 0.0;
  const double theta = -b / slope;
  double kappa = 0;
  for (const auto& a : box_corners(*family.param_set().box)) {
    const double m = family.mean_at(a), s = family.sigma_at(a);
    // slope > 0: K_x = (-inf, theta]; slope < 0: K_x = [theta, inf).
    const double p = slope > 0 ? gaussian_interval_mass(-INFINITY, theta, m, s)
                               : gaussian_interval_mass(theta, INFINITY, m, s);
    kappa = std::max(kappa, p);
  }
  return kappa;
}

bool closed_form_available(const ProblemSpec& problem) {
  return problem.family && problem.family->kind() == FamilyKind::GaussianUnivariate &&
         problem.family->param_set().is_box() && problem.variant != Variant::moment_box;
}

double kappa_exact(std::span<const double> x, const ProblemSpec& problem, int a_steps) {
  if (!closed_form_available(problem)) throw Error("kappa_exact: needs a gaussian1d family with box A");
  const auto& fam = *problem.family;
  if (problem.f_list.size() == 1 && affine_in_omega(problem.f_list)) return kappa_closed_form(x, problem.f(), fam);
  const auto& box = *fam.param_set().box;
  auto pts = box_corners(box);
  if (a_steps > 2) {
    auto g = box_points(box, a_steps);
    pts.insert(pts.end(), g.begin(), g.end());
  }
  double kappa = 0;
  for (const auto& a : pts)
    kappa = std::max(kappa, gaussian_region_mass(problem.f_list, x, fam.mean_at(a), fam.sigma_at(a)));
  return kappa;
}

double kappa_grid_mc(std::span<const double> x, const ProblemSpec& problem, int a_steps, int samples,
                     std::uint64_t seed) {
  if (samples <= 0) throw Error("kappa_grid_mc: zero samples");
  if (!problem.family || !problem.family->can_sample()) throw Error("kappa_grid_mc: family does not support sampling");
  const auto& fam = *problem.family;
  const auto& A = fam.param_set();
  if (!A.is_box() && fam.kind() != FamilyKind::FiniteList) throw Error("kappa_grid_mc: A must be a box");
  const VariableSpace& s = problem.space;
  std::vector<double> pt(s.dim(), 0.0);
  std::copy(x.begin(), x.end(), pt.begin());
  const int w0 = s.offset(Block::omega);
  auto in_K = [&](std::span<const double> omega) {
    std::copy(omega.begin(), omega.end(), pt.begin() + w0);
    for (const auto& f : problem.f_list)
      if (poly_eval(f, pt) <= 0) return true;
    return false;
  };

  std::vector<std::vector<double>> a_grid;
  if (fam.kind() == FamilyKind::FiniteList) {
    for (std::size_t i = 1; i <= fam.components().size(); ++i) a_grid.push_back({static_cast<double>(i)});
  } else {
    a_grid = box_points(*A.box, std::max(1, a_steps));
  }
  double kappa = 0;
  if (fam.kind() == FamilyKind::GaussianUnivariate) {
    // Common standard normal draws across the parameter grid.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> z(samples);
    for (auto& v : z) v = nd(rng);
    for (const auto& a : a_grid) {
      const double m = fam.mean_at(a), sg = fam.sigma_at(a);
      int hits = 0;
      for (double zi : z) {
        const double w = m + sg * zi;
        hits += in_K(std::span<const double>(&w, 1)) ? 1 : 0;
      }
      kappa = std::max(kappa, static_cast<double>(hits) / samples);
    }
    return kappa;
  }
  for (std::size_t j = 0; j < a_grid.size(); ++j) {
    const auto draws = fam.sample(a_grid[j], samples, derive_seed(seed, j));
    int hits = 0;
    for (const auto& d : draws) hits += in_K(d.value) ? 1 : 0;
    kappa = std::max(kappa, static_cast<double>(hits) / samples);
  }
  return kappa;
}

std::vector<std::vector<double>> box_grid(const SemialgebraicSet& X, int steps) {
  if (!X.is_box()) throw Error("box_grid: X must be a box");
  if (steps < 1) throw Error("box_grid: need at least one step");
  return box_points(*X.box, steps);
}

OracleEstimate feasible_set_oracle(const ProblemSpec& problem, double epsilon, int x_steps, int a_steps, int samples,
                                   std::uint64_t seed, bool force_mc) {
  const auto t0 = std::chrono::steady_clock::now();
  OracleEstimate est;
  est.grid = box_grid(problem.X, x_steps);
  est.epsilon = epsilon;
  est.x_steps = x_steps;
  est.a_steps = a_steps;
  est.samples = samples;
  est.seed = seed;
  const bool exact = !force_mc && closed_form_available(problem);
  est.method = exact ? OracleMethod::closed_form : OracleMethod::grid_mc;
  est.kappa_hat.resize(est.grid.size());
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    est.kappa_hat[i] = exact ? kappa_exact(est.grid[i], problem, a_steps)
                             : kappa_grid_mc(est.grid[i], problem, a_steps, samples, derive_seed(seed, i));
  }
  est.feasible.resize(est.grid.size());
  for (std::size_t i = 0; i < est.grid.size(); ++i) est.feasible[i] = est.kappa_hat[i] < epsilon;
  est.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

OracleEstimate with_epsilon(const OracleEstimate& est, double epsilon) {
  OracleEstimate r = est;
  r.epsilon = epsilon;
  for (std::size_t i = 0; i < r.grid.size(); ++i) r.feasible[i] = r.kappa_hat[i] < epsilon;
  return r;
}

ComparisonReport compare(const InnerApproximation& inner, const OracleEstimate& oracle) {
  const auto t0 = std::chrono::steady_clock::now();
  if (oracle.grid.empty() || static_cast<int>(oracle.grid[0].size()) != inner.w.space().n())
    throw Error("compare: grid dimension does not match the inner approximation");
  ComparisonReport rep;
  rep.grid_points = oracle.grid.size();
  for (std::size_t i = 0; i < oracle.grid.size(); ++i) {
    const bool in = inner.contains(oracle.grid[i]);
    const bool ok = oracle.feasible[i];
    rep.inner_count += in;
    rep.oracle_count += ok;
    rep.both_count += in && ok;
    rep.violations += in && !ok;
  }
  rep.coverage_ratio = rep.oracle_count > 0 ? static_cast<double>(rep.both_count) / rep.oracle_count : 0.0;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace drcc
