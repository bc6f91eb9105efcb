#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace drcc {

// Coefficient of variable `var` at position (row, col), row <= col, of a symmetric block.
// The off-diagonal value stands for both (row, col) and (col, row).
struct SymEntry {
  int var;
  int row;
  int col;
  double coef;
};

struct ConicBlock {
  int dim = 0;
  std::vector<SymEntry> entries;
};

struct Triplet {
  int row;
  int col;
  double value;
};

// maximize b'y  s.t.  Z_j = sum_i y_i A_{j,i} >= 0 (PSD) for every block,  E y = e.
// Dual: minimize e'lambda  s.t.  E'lambda - sum_j A_j^*(X_j) = b,  X_j >= 0.
struct ConicProblem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<ConicBlock> blocks;
  int num_rows = 0;
  std::vector<Triplet> equalities;  // (row, var, value)
  std::vector<double> rhs;
};

enum class SolverStatus { optimal, near_optimal, infeasible, unbounded, numerical_failure };

std::string status_name(SolverStatus s);

struct SolverSettings {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 120;
  double step_fraction = 0.98;
  bool verbose = false;
};

struct ConicSolution {
  SolverStatus status = SolverStatus::numerical_failure;
  Eigen::VectorXd y;       // moment side
  Eigen::VectorXd lambda;  // equality-row multipliers
  std::vector<Eigen::MatrixXd> X;  // certificate side Gram matrices
  double primal_objective = 0;  // b'y
  double dual_objective = 0;    // e'lambda
  double gap = 0;               // |b'y - e'lambda|
  double rel_gap = 0;
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
  int iterations = 0;
  int eliminated_rows = 0;  // equality rows removed by substitution before the interior point loop
  int kept_rows = 0;
  int free_variables = 0;
};

// Short equality rows are eliminated by sparse substitution, the rest are kept as constraints.
// The reduced problem is solved with a primal-dual interior point method (HKM direction,
// Mehrotra predictor-corrector).
ConicSolution solve_conic(const ConicProblem& problem, const SolverSettings& settings);

}  // namespace drcc
