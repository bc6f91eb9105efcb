#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drcc/distribution.hpp"
#include "drcc/polynomial.hpp"
#include "drcc/semialgebraic.hpp"

namespace drcc {

enum class Variant { base, stokes, joint, moment_box };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& s);

struct StokesCaps {
  std::optional<int> beta_max;  // default 2d - deg(f) - 2
  int gamma_max = 2;
};

// First/second-moment ambiguity: mean in a box, covariance between delta_lo I and delta_hi I.
struct MomentBoxSpec {
  std::vector<Interval> mean_bounds;
  double delta_lo = 0;
  double delta_hi = 0;
};

struct OracleSettings {
  int x_steps = 201;
  int a_steps = 100;
  int samples = 1000;
};

struct LebesgueMomentEntry {
  std::vector<int> alpha;
  double value = 0;
};

struct ProblemSpec {
  std::string name;
  VariableSpace space;
  SemialgebraicSet X;
  SemialgebraicSet Omega;
  std::vector<Polynomial> f_list;
  std::optional<DistributionFamily> family;  // absent for moment_box
  std::optional<MomentBoxSpec> moment_box;
  // Lebesgue moments of X when X is not a box.
  std::vector<LebesgueMomentEntry> lebesgue_table;
  double epsilon = 0.1;
  int degree = 2;
  Variant variant = Variant::base;
  StokesCaps stokes;
  std::uint64_t seed = 20260101;
  double noise_scale = 1.0;
  OracleSettings oracle;

  const Polynomial& f() const { return f_list.at(0); }
  // Parameter set: the family's A, or the moment-box set.
  SemialgebraicSet param_set() const;
  ConstraintRegion region() const { return {X, Omega, f_list}; }
};

// Parameter set of the moment-box ambiguity: mean bounds as (hi - m)(m - lo) >= 0 and the
// elementary symmetric functions of the principal minors of Sigma - delta_lo I and delta_hi I - Sigma
// being nonnegative. a = (m_1..m_p, Sigma upper triangle row-major).
SemialgebraicSet moment_box_set(const VariableSpace& s, const MomentBoxSpec& mb);

// 2 d_min = largest degree among the defining polynomials.
int min_relaxation_order(const ProblemSpec& spec);

// Throws Error naming the offending field.
void validate(const ProblemSpec& spec);

}  // namespace drcc
