// Acceptance run: one PASS/FAIL line per criterion. Exit code 0 whenever the run completes.
// The relaxation degree d of a criterion is the degree of w_d, so it runs at order d / 2.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "drcc/certificate.hpp"
#include "drcc/oracle.hpp"
#include "drcc/relaxation.hpp"
#include "support.hpp"

using namespace drcc;
using namespace drcc::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;
std::FILE* g_report = nullptr;  // copy of the report, since ctest hides output of passing tests

void run(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++g_failed;
  for (std::FILE* out : {stdout, g_report}) {
    if (!out) continue;
    std::fprintf(out, "[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), s);
    std::fflush(out);
  }
}

std::string num(double v, int prec = 6) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << v;
  return ss.str();
}

bool extended() {
  const char* e = std::getenv("DRCC_ACCEPTANCE_EXTENDED");
  return e && std::string(e) == "1";
}

// Example 1 solves shared by criteria 1, 3, 4 and 5.
std::map<std::pair<Variant, int>, SolveResult> g_ex1;

const SolveResult& ex1(Variant v, int order) {
  const auto key = std::make_pair(v, order);
  auto it = g_ex1.find(key);
  if (it != g_ex1.end()) return it->second;
  ProblemSpec p = example("ex1");
  p.variant = v;
  p.degree = order;
  return g_ex1.emplace(key, solve(build_relaxation(p))).first->second;
}

std::string label(Variant v, int order) { return variant_name(v) + " d=" + std::to_string(2 * order); }

// Left end of the first extracted interval, NaN when the inner set is empty.
double left_end(const SolveResult& r, double eps) {
  const ProblemSpec p = example("ex1");
  const auto iv = extract_intervals(extract_inner(r, eps, p.X), -1, 1);
  return iv.empty() ? std::nan("") : iv.front().first;
}

Outcome c1() {
  const double eps = 0.3;
  struct Row {
    int order;
    double lo, hi;
  };
  bool ok = true;
  std::string d;
  for (const Row& row : {Row{4, 0.80, 0.92}, Row{6, 0.70, 0.82}}) {
    const SolveResult& s = ex1(Variant::stokes, row.order);
    const double l = s.usable() ? left_end(s, eps) : std::nan("");
    const bool in = l >= row.lo && l <= row.hi && l >= 0.615;
    ok = ok && in;
    d += label(Variant::stokes, row.order) + " l=" + num(l, 5) + (in ? " ok" : " out of [" + num(row.lo) + "," + num(row.hi) + "]") + "; ";
    const SolveResult& b = ex1(Variant::base, row.order);
    const bool empty = b.usable() && std::isnan(left_end(b, eps));
    ok = ok && empty;
    d += label(Variant::base, row.order) + (empty ? " empty" : " NOT empty") + "; ";
  }
  return {ok, d};
}

// Bisection on the closed-form worst-case probability.
Outcome c2() {
  const ProblemSpec p = example("ex1");
  auto kappa = [&](double x) { return kappa_closed_form(std::vector<double>{x}, p.f(), *p.family); };
  double lo = -1, hi = 1;
  for (int i = 0; i < 80; ++i) {
    const double m = 0.5 * (lo + hi);
    (kappa(m) < 0.3 ? hi : lo) = m;
  }
  const double l = 0.5 * (lo + hi);
  return {std::abs(l - 0.6244) <= 0.002 && kappa(1.0) < 0.3, "l*=" + num(l, 6) + " (target 0.6244 +- 0.002)"};
}

Outcome c3() {
  bool ok = true;
  std::string d = "rho:";
  double prev = 2;
  for (int order = 1; order <= 6; ++order) {
    const SolveResult& r = ex1(Variant::base, order);
    ok = ok && r.usable() && r.rho_d <= prev + 1e-7;
    d += " " + num(r.rho_d, 7) + "(" + status_name(r.status) + ")";
    prev = r.rho_d;
  }
  return {ok, d + " over orders 1..6 (d = 2..12)"};
}

Outcome c4() {
  bool ok = true;
  std::string d;
  for (int order : {2, 3, 4}) {
    const SolveResult &s = ex1(Variant::stokes, order), &b = ex1(Variant::base, order);
    const bool le = s.usable() && b.usable() && s.rho_d <= b.rho_d + 1e-7;
    ok = ok && le;
    d += "d=" + std::to_string(2 * order) + " " + num(s.rho_d) + " <= " + num(b.rho_d) + (le ? "" : " NO") + "; ";
  }
  return {ok, d};
}

Outcome c5() {
  const ProblemSpec p = example("ex1");
  const auto grid = box_grid(p.X, 201);
  std::vector<double> kappa;
  for (const auto& x : grid) kappa.push_back(kappa_closed_form(x, p.f(), *p.family));
  bool ok = true;
  double worst = 1e300;
  std::string at;
  for (const auto& [key, r] : g_ex1) {
    if (!r.usable()) continue;
    const auto inner = extract_inner(r, p.epsilon, p.X);
    double m = 1e300;
    for (std::size_t i = 0; i < grid.size(); ++i) m = std::min(m, inner.value(grid[i]) - kappa[i]);
    if (m < worst) worst = m, at = label(key.first, key.second);
    ok = ok && m >= -1e-4;
  }
  return {ok, std::to_string(g_ex1.size()) + " solved configurations, min(w - kappa)=" + num(worst, 4) + " at " + at};
}

Outcome c6() {
  bool ok = true;
  std::string d;
  for (double c : {-1.0, 1.0}) {
    ProblemSpec p = example("ex1");
    p.variant = Variant::base;
    p.f_list = {Polynomial::constant(p.space, c)};
    const double want = c < 0 ? 1.0 : 0.0;
    for (int order : {1, 2, 3}) {
      const SolveResult r = solve(build_base(p, order));
      const bool hit = r.usable() && std::abs(r.rho_d - want) <= 1e-6;
      ok = ok && hit;
      d += "f=" + num(c) + " d=" + std::to_string(2 * order) + " rho=" + num(r.rho_d, 9) + "; ";
    }
  }
  return {ok, d};
}

double moment_at(const DistributionFamily& fam, const std::vector<int>& beta, const std::vector<double>& a) {
  return poly_eval(fam.moment_polynomial(beta), embed_point(fam.space(), Block::param, a));
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

Outcome c7() {
  std::mt19937_64 rng(7);
  auto draw = [&](const std::vector<Interval>& box) {
    std::vector<double> a;
    for (const auto& [lo, hi] : box) a.push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
    return a;
  };
  std::map<std::string, double> worst;
  {
    VariableSpace s(1, 1, 2);
    const std::vector<Interval> box{{-1, 1}, {0.5, 1.5}};
    const auto fam = DistributionFamily::gaussian1d(s, make_box(s, Block::param, box));
    for (int t = 0; t < 20; ++t) {
      const auto a = draw(box);
      for (int b = 0; b <= 10; ++b)
        worst["gaussian1d"] = std::max(worst["gaussian1d"], rel_err(moment_at(fam, {b}, a), gaussian1d_moment(b, a[0], a[1])));
    }
  }
  {
    VariableSpace s(1, 2, 5);
    const std::vector<Interval> box{{-0.5, 0.5}, {-0.5, 0.5}, {0.5, 1.5}, {-0.2, 0.2}, {0.5, 1.5}};
    const auto fam = DistributionFamily::gaussian(s, make_box(s, Block::param, box));
    for (int t = 0; t < 20; ++t) {
      const auto a = draw(box);
      const std::vector<std::vector<double>> Sigma{{a[2], a[3]}, {a[3], a[4]}};
      for (int b1 = 0; b1 <= 10; ++b1)
        for (int b2 = 0; b1 + b2 <= 10; ++b2)
          worst["gaussian"] = std::max(worst["gaussian"], rel_err(moment_at(fam, {b1, b2}, a),
                                                                  gaussian_moment({b1, b2}, {a[0], a[1]}, Sigma)));
    }
  }
  {
    VariableSpace s(1, 2, 2);
    const std::vector<Interval> box{{0.5, 2}, {0.5, 2}};
    const auto fam = DistributionFamily::exponential(s, make_box(s, Block::param, box));
    for (int t = 0; t < 20; ++t) {
      const auto a = draw(box);
      for (int b1 = 0; b1 <= 10; ++b1)
        for (int b2 = 0; b1 + b2 <= 10; ++b2)
          worst["exponential"] = std::max(worst["exponential"], rel_err(moment_at(fam, {b1, b2}, a), exponential_moment({b1, b2}, a)));
    }
  }
  {
    VariableSpace s(1, 1, 1);
    const std::vector<Interval> box{{0.5, 5}};
    const auto fam = DistributionFamily::poisson(s, make_box(s, Block::param, box));
    for (int t = 0; t < 20; ++t) {
      const auto a = draw(box);
      for (int b = 0; b <= 10; ++b)
        worst["poisson"] = std::max(worst["poisson"], rel_err(moment_at(fam, {b}, a), poisson_moment(b, a[0])));
    }
  }
  {
    VariableSpace s(1, 1, 1);
    const std::vector<Interval> box{{0.05, 0.95}};
    const int N = 10;
    const auto fam = DistributionFamily::binomial(s, N, make_box(s, Block::param, box));
    for (int t = 0; t < 20; ++t) {
      const auto a = draw(box);
      for (int b = 0; b <= 10; ++b)
        worst["binomial"] = std::max(worst["binomial"], rel_err(moment_at(fam, {b}, a), binomial_moment(b, N, a[0])));
    }
    // The listed second moment N a (1 - a) is the variance; the moment adds N^2 a^2.
    const double a = 0.3;
    if (std::abs(moment_at(fam, {2}, {a}) - (N * a * (1 - a) + N * N * a * a)) > 1e-12) worst["binomial"] = 1;
  }
  bool ok = true;
  std::string d;
  for (const auto& [name, e] : worst) {
    ok = ok && e <= 1e-9;
    d += name + " " + num(e, 2) + "; ";
  }
  return {ok, d + "|beta| <= 10, 20 random a each"};
}

Outcome c8() {
  VariableSpace s(1, 1, 2);
  const Polynomial f = Polynomial::variable(s, Block::x, 0) - Polynomial::variable(s, Block::omega, 0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(-1, 1), um(-0.1, 0.1), us(0.8, 1.0);
  std::uniform_int_distribution<int> ub(0, 3);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double x = ux(rng), m = um(rng), sg = us(rng);
    const Polynomial q = stokes_polynomial(f, ub(rng));
    auto integrand = [&](double w) {
      const double z = (w - m) / sg;
      const std::vector<double> pt{x, w, m, sg};
      return poly_eval(q, pt) * std::exp(-0.5 * z * z) / (sg * std::sqrt(2 * M_PI));
    };
    worst = std::max(worst, std::abs(adaptive_simpson(integrand, x, m + 14 * sg, 1e-12)));
  }
  return {worst < 1e-8, "max |integral| = " + num(worst, 3) + " over 50 cases"};
}

Outcome c9() {
  ProblemSpec p = example("ex2");
  p.degree = 4;
  const SolveResult r = solve(build_relaxation(p));
  if (!r.usable()) return {false, "solve status " + status_name(r.status)};
  const auto inner = extract_inner(r, p.epsilon, p.X);
  const auto est = feasible_set_oracle(p, p.epsilon, p.oracle.x_steps, p.oracle.a_steps, 0, p.seed);
  const auto rep = compare(inner, est);
  // Nonconvexity: two members whose midpoint is not a member.
  std::vector<std::vector<double>> members;
  bool upper = false, other = false;
  for (const auto& x : est.grid)
    if (inner.contains(x)) {
      members.push_back(x);
      (x[1] > std::abs(x[0]) ? upper : other) = true;
    }
  bool nonconvex = false;
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200000 && !nonconvex && members.size() > 1; ++t) {
    const auto& a = members[rng() % members.size()];
    const auto& b = members[rng() % members.size()];
    const std::vector<double> mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    nonconvex = !inner.contains(mid);
  }
  const bool ok = rep.inner_count > 0 && upper && other && nonconvex && rep.violations == 0 && rep.coverage_ratio >= 0.25;
  std::string d = "d=8 rho=" + num(r.rho_d) + " members " + std::to_string(rep.inner_count) + ", x2>|x1| " +
                  (upper ? "yes" : "no") + ", elsewhere " + (other ? "yes" : "no") + ", nonconvex " +
                  (nonconvex ? "yes" : "no") + ", violations " + std::to_string(rep.violations) + ", coverage " +
                  num(rep.coverage_ratio, 4);
  if (extended()) {
    p.degree = 6;
    const SolveResult r12 = solve(build_relaxation(p));
    const double cov = r12.usable() ? compare(extract_inner(r12, p.epsilon, p.X), est).coverage_ratio : std::nan("");
    const bool hit = std::abs(cov - 0.74) <= 0.08;
    d += "; extended d=12 coverage " + num(cov, 4) + (hit ? " ok" : " out of 0.74 +- 0.08") + " in " + num(r12.seconds, 4) + " s";
    return {ok && hit, d};
  }
  return {ok, d + "; extended d=12 not run (DRCC_ACCEPTANCE_EXTENDED=1, estimated well above the 30 min budget)"};
}

Outcome c10() {
  ProblemSpec p = example("ex3");
  p.degree = 4;
  const SolveResult r = solve(build_relaxation(p));
  if (!r.usable()) return {false, "solve status " + status_name(r.status)};
  const auto base = feasible_set_oracle(p, 0.5, p.oracle.x_steps, p.oracle.a_steps, 0, p.seed);
  std::string d = "d=8 coverage:";
  std::map<double, double> cov;
  int violations = 0;
  for (double eps : {0.5, 0.25, 0.125, 0.0625, 0.03125}) {
    const auto rep = compare(extract_inner(r, eps, p.X), with_epsilon(base, eps));
    cov[eps] = rep.coverage_ratio;
    violations += rep.violations;
    d += " eps " + num(eps) + " " + num(rep.coverage_ratio, 4) + ";";
  }
  const bool ok = cov[0.5] >= 0.90 && cov[0.5] <= 1.0 && cov[0.03125] <= 0.05;
  return {ok, d + " violations " + std::to_string(violations) + " (need [0.90, 1] at 0.5, <= 0.05 at 0.03125)"};
}

bool same_conic(const ConicProblem& a, const ConicProblem& b) {
  if (a.num_vars != b.num_vars || a.num_rows != b.num_rows || a.objective != b.objective || a.rhs != b.rhs) return false;
  if (a.equalities.size() != b.equalities.size() || a.blocks.size() != b.blocks.size()) return false;
  for (std::size_t i = 0; i < a.equalities.size(); ++i) {
    const auto &x = a.equalities[i], &y = b.equalities[i];
    if (x.row != y.row || x.col != y.col || x.value != y.value) return false;
  }
  for (std::size_t j = 0; j < a.blocks.size(); ++j) {
    if (a.blocks[j].dim != b.blocks[j].dim || a.blocks[j].entries.size() != b.blocks[j].entries.size()) return false;
    for (std::size_t k = 0; k < a.blocks[j].entries.size(); ++k) {
      const auto &x = a.blocks[j].entries[k], &y = b.blocks[j].entries[k];
      if (x.var != y.var || x.row != y.row || x.col != y.col || x.coef != y.coef) return false;
    }
  }
  return true;
}

Outcome c11() {
  const ProblemSpec p = example("joint1");
  const SolveResult r = solve(build_relaxation(p));
  if (!r.usable()) return {false, "solve status " + status_name(r.status)};
  const auto est = feasible_set_oracle(p, p.epsilon, p.oracle.x_steps, p.oracle.a_steps, 0, p.seed);
  const auto rep = compare(extract_inner(r, p.epsilon, p.X), est);
  ProblemSpec single = example("ex1");
  single.variant = Variant::joint;
  bool same = true;
  for (int order : {1, 2, 3}) same = same && same_conic(to_conic(detail::assemble_joint(single, order)), to_conic(build_base(single, order)));
  const bool ok = rep.violations == 0 && rep.inner_count > 0 && same;
  return {ok, "band d=" + std::to_string(2 * p.degree) + " rho=" + num(r.rho_d) + " members " +
                  std::to_string(rep.inner_count) + " of " + std::to_string(rep.oracle_count) + " feasible, violations " +
                  std::to_string(rep.violations) +
                  ", single-f joint equals base " + (same ? "yes" : "no")};
}

Outcome c12() {
  const ProblemSpec p = example("momentbox1");
  bool ok = true;
  std::string d;
  double prev = 2;
  for (int order : {2, 3}) {
    const MomentRelaxation R = build_moment_box(p, order);
    const SlaterWitness w = slater_witness(R);
    const SolveResult r = solve(R);
    const bool good = w.passed() && r.usable() && r.rho_d >= -1e-7 && r.rho_d <= 1 + 1e-7 && r.rho_d <= prev + 1e-7;
    ok = ok && good;
    d += "d=" + std::to_string(2 * order) + " margin " + num(w.margin, 3) + " residual " +
         num(w.check.max_equality_residual, 2) + " rho " + num(r.rho_d) + "; ";
    prev = r.rho_d;
  }
  return {ok, d};
}

}  // namespace

int main() {
  g_report = std::fopen(source_path("acceptance_report.txt").c_str(), "w");
  for (std::FILE* out : {stdout, g_report})
    if (out) std::fprintf(out, "acceptance: d is the degree of w_d (order d/2)\n");
  run(1, "Example 1 intervals", c1);
  run(2, "true feasible set", c2);
  run(3, "monotone hierarchy", c3);
  run(4, "Stokes dominance", c4);
  run(5, "underestimator", c5);
  run(6, "constant caps", c6);
  run(7, "moment maps", c7);
  run(8, "Stokes identity", c8);
  run(9, "Example 2", c9);
  run(10, "Example 3 table", c10);
  run(11, "joint variant", c11);
  run(12, "moment box", c12);
  for (std::FILE* out : {stdout, g_report})
    if (out) std::fprintf(out, "%d of 12 criteria failed\n", g_failed);
  if (g_report) std::fclose(g_report);
  return 0;
}
