#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "drcc/polynomial.hpp"

namespace drcc {

using Interval = std::pair<double, double>;

// {z : g(z) >= 0 for all g in inequalities, h(z) = 0 for all h in equalities} over one block.
struct SemialgebraicSet {
  VariableSpace space;
  Block block = Block::x;
  std::vector<Polynomial> inequalities;
  std::vector<Polynomial> equalities;
  std::optional<double> ball_radius_sq;
  // Set when the description came from a box; used for normalization and Lebesgue moments.
  std::optional<std::vector<Interval>> box;

  int dim() const { return space.size(block); }
  int max_degree() const;
  bool is_box() const { return box.has_value(); }
};

// The box as paired linear inequalities hi - z >= 0, z - lo >= 0.
SemialgebraicSet make_box(const VariableSpace& space, Block block, std::vector<Interval> bounds);

// Whole block, no constraints (e.g. Omega = R^p).
SemialgebraicSet make_free(const VariableSpace& space, Block block);

Polynomial ball_polynomial(const VariableSpace& space, Block block, double M);

// Sum of max(lo^2, hi^2) over the box coordinates.
double box_ball_radius_sq(const std::vector<Interval>& bounds);

SemialgebraicSet augment_ball(const SemialgebraicSet& set, double M);

// point has the block's dimension.
bool contains(const SemialgebraicSet& set, std::span<const double> point, double tol = 1e-9);

// K = {(x, omega) in X x Omega : f(x, omega) <= 0} (union over f_list).
struct ConstraintRegion {
  SemialgebraicSet X;
  SemialgebraicSet Omega;
  std::vector<Polynomial> f_list;

  bool contains(std::span<const double> x, std::span<const double> omega, double tol = 1e-9) const;
};

// Embeds a block-sized point into the full space with zeros elsewhere.
std::vector<double> embed_point(const VariableSpace& space, Block block, std::span<const double> point);

}  // namespace drcc
