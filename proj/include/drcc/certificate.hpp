#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drcc/conic.hpp"
#include "drcc/relaxation.hpp"

namespace drcc {

// Variable index of every moment is measure.offset + position.
ConicProblem to_conic(const MomentRelaxation& R);

struct SolveResult {
  SolverStatus status = SolverStatus::numerical_failure;
  double rho_d = 0;
  int order = 0;
  Variant variant = Variant::base;
  // Moment sequences per measure, in normalized coordinates.
  std::vector<std::vector<double>> moments;
  Polynomial dual_w;  // in x
  Polynomial dual_h;  // in (x, omega)
  int iterations = 0;
  double gap = 0;
  double rel_gap = 0;
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
  double integral_w = 0;  // integral of w against the normalized Lebesgue measure on X
  double seconds = 0;
  bool resolved = false;  // true when the relaxed-tolerance re-solve produced this result

  int degree() const { return 2 * order; }
  bool usable() const { return status == SolverStatus::optimal || status == SolverStatus::near_optimal; }
};

// Solves, re-solving once at 1e-6 tolerances after a numerical failure.
SolveResult solve(const MomentRelaxation& R, const SolverSettings& settings = {});

// Fills dual_w / dual_h / moments from a conic solution.
SolveResult interpret_solution(const MomentRelaxation& R, const ConicSolution& sol);

struct InnerApproximation {
  Polynomial w;
  double epsilon = 0;
  int degree = 0;
  SemialgebraicSet X;

  double value(std::span<const double> x) const;
  bool contains(std::span<const double> x) const;
};

InnerApproximation extract_inner(const SolveResult& result, double epsilon, const SemialgebraicSet& X);

struct CertificationReport {
  double min_gap = 0;             // min over grid of w(x) - kappa(x)
  std::vector<double> argmin;
  int violations = 0;             // points with w - kappa < -tol
  double tol = 1e-4;
  std::size_t points = 0;
};

CertificationReport certify_pointwise(const InnerApproximation& inner,
                                      const std::vector<std::pair<std::vector<double>, double>>& oracle_values,
                                      double tol = 1e-4);

// 1D: maximal intervals of {x in [lo, hi] : w(x) < epsilon}, from a uniform grid refined by bisection.
std::vector<Interval> extract_intervals(const InnerApproximation& inner, double lo, double hi, int grid = 2001,
                                        double tol = 1e-6);

// Largest violation of the relaxation's equalities and most negative PSD eigenvalue at the
// returned moments.
struct FeasibilityCheck {
  double max_equality_residual = 0;
  double min_psd_eigenvalue = 0;
};
FeasibilityCheck check_moments(const MomentRelaxation& R, const std::vector<std::vector<double>>& moments);

// Largest t <= 1 such that some moment vector satisfies every equality with all PSD blocks
// >= t I. A positive margin is a numerical Slater point for the moment side.
// The margin shrinks quickly with the order, so it is judged against the equality residual.
struct SlaterWitness {
  double margin = 0;
  SolverStatus status = SolverStatus::numerical_failure;
  FeasibilityCheck check;  // of the witness moments against the original relaxation
  // Solved, equalities within 1e-6, margin >= min_margin and >= 100 x the residual,
  // and the smallest eigenvalue at least half the margin.
  bool passed(double min_margin = 1e-10) const;
};
SlaterWitness slater_witness(const MomentRelaxation& R, const SolverSettings& settings = {});

}  // namespace drcc
