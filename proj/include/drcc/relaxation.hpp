#pragma once

#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "drcc/problem.hpp"

namespace drcc {

// Normalized Lebesgue moments of X, keyed by the x-exponents.
struct LebesgueMoments {
  std::map<std::vector<int>, double> values;
  double at(const std::vector<int>& alpha) const;
};

LebesgueMoments lebesgue_box_moments(const std::vector<Interval>& box, int max_degree);

// physical_i = shift_i + scale_i * normalized_i for every global variable.
struct AffineMap {
  std::vector<double> shift;
  std::vector<double> scale;

  static AffineMap identity(int dim);
  std::vector<double> to_physical(std::span<const double> z) const;
  std::vector<double> to_normalized(std::span<const double> z) const;
  // p(physical) expressed in normalized variables.
  Polynomial pull_back(const Polynomial& p) const;
  // q(normalized) expressed in physical variables.
  Polynomial push_forward(const Polynomial& q) const;
};

// The problem after mapping every box to [-1,1]^k and scaling the noise; sets are ball-augmented.
struct NormalizedProblem {
  VariableSpace space;
  SemialgebraicSet X, Omega, A;
  std::vector<Polynomial> f_list;
  AffineMap map;
  LebesgueMoments lebesgue;
  // Moment polynomial in normalized (omega, a); cached.
  std::function<const Polynomial&(const std::vector<int>&)> moment;
  // Univariate Gaussian: q_beta in normalized variables.
  std::function<Polynomial(int)> stokes;
};

NormalizedProblem normalize(const ProblemSpec& spec, int order);

struct MeasureBlock {
  std::string label;
  std::vector<Block> blocks;
  int max_degree = 0;
  std::vector<Monomial> monomials;
  std::unordered_map<Monomial, int, MonomialHash> index;
  int offset = 0;

  int size() const { return static_cast<int>(monomials.size()); }
  int position(const Monomial& m) const;
  bool has(const Monomial& m) const { return index.count(m) > 0; }
};

struct PsdBlockSpec {
  std::string name;
  int measure = 0;
  Polynomial multiplier;
  int order = 0;
  std::vector<Monomial> basis;

  int dim() const { return static_cast<int>(basis.size()); }
};

struct LinearTerm {
  int measure;
  int position;
  double coef;
};

enum class RowKind {
  coupling,       // L_{y+u}(x^a w^b) - L_v(x^a p_b(a)) = 0
  marginal,       // L_v(x^a) = lambda_a
  stokes_y_tie,   // L_z1(x^a w^b) = L_y(x^a w^b)
  stokes_v_tie,   // L_z1(x^a a^g) + L_z2(x^a a^g) = L_v(x^a a^g)
  stokes,         // L_z1(x^a a^g q_b) = 0
  moment_sum,     // phi + nu = mu
  mu_marginal,    // mu_x = lambda
  psi_marginal,   // psi_x = lambda
  first_moment,   // E[x^a w_i] ties
  second_moment   // E[x^a w_i w_j] ties
};

struct EqualityConstraint {
  RowKind kind;
  Monomial key;
  std::vector<LinearTerm> terms;
  double rhs = 0;
};

struct MomentRelaxation {
  int order = 0;
  Variant variant = Variant::base;
  VariableSpace space;
  std::vector<MeasureBlock> measures;
  std::vector<PsdBlockSpec> psd_blocks;
  std::vector<EqualityConstraint> equalities;
  std::vector<LinearTerm> objective;
  AffineMap map;
  LebesgueMoments lebesgue;

  int num_moments() const;
  int measure_index(const std::string& label) const;
  // Entry (r, c) of a PSD block as a sparse functional over that block's measure.
  std::vector<LinearTerm> entry(const PsdBlockSpec& b, int r, int c) const;
  std::size_t count_rows(RowKind k) const;
};

MomentRelaxation build_base(const ProblemSpec& problem, int d);
MomentRelaxation build_stokes(const ProblemSpec& problem, int d, int beta_max, int gamma_max);
MomentRelaxation build_stokes(const ProblemSpec& problem, int d);
MomentRelaxation build_joint(const ProblemSpec& problem, int d);
MomentRelaxation build_moment_box(const ProblemSpec& problem, int d);
// Dispatch on problem.variant with problem.degree.
MomentRelaxation build_relaxation(const ProblemSpec& problem);

int default_beta_max(const ProblemSpec& problem, int d);

namespace detail {
// Joint assembly without the s_f >= 2 guard; with one f it coincides with build_base.
MomentRelaxation assemble_joint(const ProblemSpec& problem, int d);
}  // namespace detail

}  // namespace drcc
