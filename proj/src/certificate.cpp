#include "drcc/certificate.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <limits>

namespace drcc {

ConicProblem to_conic(const MomentRelaxation& R) {
  ConicProblem P;
  P.num_vars = R.num_moments();
  P.objective.assign(P.num_vars, 0.0);
  for (const auto& t : R.objective) P.objective[R.measures[t.measure].offset + t.position] += t.coef;
  for (const auto& b : R.psd_blocks) {
    ConicBlock cb;
    cb.dim = b.dim();
    const int off = R.measures[b.measure].offset;
    for (int r = 0; r < cb.dim; ++r)
      for (int c = r; c < cb.dim; ++c)
        for (const auto& t : R.entry(b, r, c)) cb.entries.push_back({off + t.position, r, c, t.coef});
    P.blocks.push_back(std::move(cb));
  }
  P.num_rows = static_cast<int>(R.equalities.size());
  for (int i = 0; i < P.num_rows; ++i) {
    const auto& eq = R.equalities[i];
    for (const auto& t : eq.terms) P.equalities.push_back({i, R.measures[t.measure].offset + t.position, t.coef});
    P.rhs.push_back(eq.rhs);
  }
  return P;
}

namespace {

bool is_marginal(RowKind k) {
  return k == RowKind::marginal || k == RowKind::mu_marginal || k == RowKind::psi_marginal;
}

bool is_coupling(RowKind k) { return k == RowKind::coupling || k == RowKind::moment_sum; }

}  // namespace

SolveResult interpret_solution(const MomentRelaxation& R, const ConicSolution& sol) {
  SolveResult r;
  r.status = sol.status;
  r.order = R.order;
  r.variant = R.variant;
  r.rho_d = sol.primal_objective;
  r.iterations = sol.iterations;
  r.gap = sol.gap;
  r.rel_gap = sol.rel_gap;
  r.primal_infeasibility = sol.primal_infeasibility;
  r.dual_infeasibility = sol.dual_infeasibility;
  for (const auto& m : R.measures) {
    std::vector<double> seq(m.size());
    for (int i = 0; i < m.size(); ++i) seq[i] = sol.y.size() ? sol.y(m.offset + i) : 0.0;
    r.moments.push_back(std::move(seq));
  }
  Polynomial w(R.space), h(R.space);
  double integral = 0;
  for (std::size_t i = 0; i < R.equalities.size() && sol.lambda.size(); ++i) {
    const auto& eq = R.equalities[i];
    const double l = sol.lambda(static_cast<int>(i));
    if (is_marginal(eq.kind)) {
      w.add_term(eq.key, l);
      integral += l * eq.rhs;
    } else if (is_coupling(eq.kind)) {
      h.add_term(eq.key, l);
    }
  }
  r.integral_w = integral;
  r.dual_w = R.map.push_forward(w);
  r.dual_h = R.map.push_forward(h);
  return r;
}

SolveResult solve(const MomentRelaxation& R, const SolverSettings& settings) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConicProblem P = to_conic(R);
  ConicSolution sol = solve_conic(P, settings);
  bool resolved = false;
  if (sol.status == SolverStatus::numerical_failure) {
    SolverSettings relaxed = settings;
    relaxed.gap_tol = std::max(settings.gap_tol, 1e-6);
    relaxed.feas_tol = std::max(settings.feas_tol, 1e-6);
    relaxed.step_fraction = std::min(settings.step_fraction, 0.9);
    ConicSolution again = solve_conic(P, relaxed);
    if (again.status == SolverStatus::optimal) again.status = SolverStatus::near_optimal;
    if (again.status != SolverStatus::numerical_failure || again.rel_gap < sol.rel_gap) {
      sol = std::move(again);
      resolved = true;
    }
  }
  SolveResult r = interpret_solution(R, sol);
  r.resolved = resolved;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

double InnerApproximation::value(std::span<const double> x) const {
  std::vector<double> pt(w.space().dim(), 0.0);
  std::copy(x.begin(), x.end(), pt.begin());
  return poly_eval(w, pt);
}

bool InnerApproximation::contains(std::span<const double> x) const {
  return drcc::contains(X, x, 1e-12) && value(x) < epsilon;
}

InnerApproximation extract_inner(const SolveResult& result, double epsilon, const SemialgebraicSet& X) {
  if (!result.usable()) throw Error("extract_inner: solve did not succeed (status " + status_name(result.status) + ")");
  if (!(epsilon > 0 && epsilon < 1)) throw Error("epsilon: must lie in (0, 1)");
  return {result.dual_w, epsilon, result.degree(), X};
}

CertificationReport certify_pointwise(const InnerApproximation& inner,
                                      const std::vector<std::pair<std::vector<double>, double>>& oracle_values,
                                      double tol) {
  CertificationReport rep;
  rep.tol = tol;
  rep.points = oracle_values.size();
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (const auto& [x, kappa] : oracle_values) {
    const double g = inner.value(x) - kappa;
    if (g < rep.min_gap) {
      rep.min_gap = g;
      rep.argmin = x;
    }
    if (g < -tol) ++rep.violations;
  }
  return rep;
}

std::vector<Interval> extract_intervals(const InnerApproximation& inner, double lo, double hi, int grid, double tol) {
  if (inner.w.space().n() != 1) throw Error("extract_intervals: one-dimensional x only");
  if (grid < 2) throw Error("extract_intervals: need at least 2 grid points");
  auto g = [&](double x) { return inner.value(std::span<const double>(&x, 1)) - inner.epsilon; };
  auto refine = [&](double a, double b) {
    // g(a) and g(b) have opposite membership; returns the crossing.
    const bool in_a = g(a) < 0;
    while (b - a > tol) {
      const double c = 0.5 * (a + b);
      if ((g(c) < 0) == in_a)
        a = c;
      else
        b = c;
    }
    return 0.5 * (a + b);
  };
  std::vector<Interval> out;
  double prev_x = lo;
  bool prev_in = g(lo) < 0;
  double start = lo;
  for (int i = 1; i < grid; ++i) {
    const double x = lo + (hi - lo) * i / (grid - 1);
    const bool in = g(x) < 0;
    if (in != prev_in) {
      const double c = refine(prev_x, x);
      if (in)
        start = c;
      else
        out.push_back({start, c});
    }
    prev_in = in;
    prev_x = x;
  }
  if (prev_in) out.push_back({start, hi});
  return out;
}

FeasibilityCheck check_moments(const MomentRelaxation& R, const std::vector<std::vector<double>>& moments) {
  FeasibilityCheck fc;
  for (const auto& eq : R.equalities) {
    double v = -eq.rhs;
    for (const auto& t : eq.terms) v += t.coef * moments[t.measure][t.position];
    fc.max_equality_residual = std::max(fc.max_equality_residual, std::abs(v));
  }
  fc.min_psd_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& b : R.psd_blocks) {
    Eigen::MatrixXd M(b.dim(), b.dim());
    for (int r = 0; r < b.dim(); ++r)
      for (int c = r; c < b.dim(); ++c) {
        double v = 0;
        for (const auto& t : R.entry(b, r, c)) v += t.coef * moments[t.measure][t.position];
        M(r, c) = M(c, r) = v;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    fc.min_psd_eigenvalue = std::min(fc.min_psd_eigenvalue, es.eigenvalues()(0));
  }
  return fc;
}

bool SlaterWitness::passed(double min_margin) const {
  const bool solved = status == SolverStatus::optimal || status == SolverStatus::near_optimal;
  return solved && check.max_equality_residual < 1e-6 && margin >= min_margin &&
         margin >= 100 * check.max_equality_residual && check.min_psd_eigenvalue > 0.5 * margin;
}

SlaterWitness slater_witness(const MomentRelaxation& R, const SolverSettings& settings) {
  ConicProblem P = to_conic(R);
  const int m = P.num_vars, t = m, one = m + 1;
  P.num_vars = m + 2;
  P.objective.assign(P.num_vars, 0.0);
  P.objective[t] = 1.0;
  for (auto& b : P.blocks)
    for (int i = 0; i < b.dim; ++i) b.entries.push_back({t, i, i, -1.0});
  ConicBlock cap;
  cap.dim = 1;
  cap.entries = {{one, 0, 0, 1.0}, {t, 0, 0, -1.0}};
  P.blocks.push_back(cap);
  P.equalities.push_back({P.num_rows, one, 1.0});
  P.rhs.push_back(1.0);
  ++P.num_rows;

  const ConicSolution sol = solve_conic(P, settings);
  SlaterWitness w;
  w.status = sol.status;
  if (sol.y.size() != P.num_vars) return w;
  w.margin = sol.y(t);
  std::vector<std::vector<double>> moments;
  for (const auto& mb : R.measures) {
    std::vector<double> v(mb.size());
    for (int i = 0; i < mb.size(); ++i) v[i] = sol.y(mb.offset + i);
    moments.push_back(std::move(v));
  }
  w.check = check_moments(R, moments);
  return w;
}

}  // namespace drcc
