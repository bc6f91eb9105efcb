#include "drcc/semialgebraic.hpp"

#include <algorithm>
#include <cmath>

namespace drcc {

int SemialgebraicSet::max_degree() const {
  int d = 0;
  for (const auto& g : inequalities) d = std::max(d, g.degree());
  for (const auto& h : equalities) d = std::max(d, h.degree());
  return d;
}

SemialgebraicSet make_box(const VariableSpace& space, Block block, std::vector<Interval> bounds) {
  if (static_cast<int>(bounds.size()) != space.size(block))
    throw Error("box: expected " + std::to_string(space.size(block)) + " intervals for block " + block_name(block));
  SemialgebraicSet s;
  s.space = space;
  s.block = block;
  for (int i = 0; i < static_cast<int>(bounds.size()); ++i) {
    auto [lo, hi] = bounds[i];
    if (!(lo <= hi)) throw Error("box: need lo <= hi in every coordinate");
    Polynomial z = Polynomial::variable(space, block, i);
    s.inequalities.push_back(Polynomial::constant(space, hi) - z);
    s.inequalities.push_back(z - Polynomial::constant(space, lo));
  }
  s.box = std::move(bounds);
  return s;
}

SemialgebraicSet make_free(const VariableSpace& space, Block block) {
  SemialgebraicSet s;
  s.space = space;
  s.block = block;
  return s;
}

Polynomial ball_polynomial(const VariableSpace& space, Block block, double M) {
  Polynomial g = Polynomial::constant(space, M);
  for (int i = 0; i < space.size(block); ++i) {
    Polynomial z = Polynomial::variable(space, block, i);
    g -= z * z;
  }
  return g;
}

double box_ball_radius_sq(const std::vector<Interval>& bounds) {
  double M = 0;
  for (auto [lo, hi] : bounds) M += std::max(lo * lo, hi * hi);
  return M;
}

SemialgebraicSet augment_ball(const SemialgebraicSet& set, double M) {
  if (!(M > 0)) throw Error("augment_ball: M must be positive");
  Polynomial ball = ball_polynomial(set.space, set.block, M);
  SemialgebraicSet r = set;
  r.inequalities.clear();
  r.inequalities.push_back(ball);
  for (const auto& g : set.inequalities) {
    if (g.distance(ball) > 1e-12) r.inequalities.push_back(g);
  }
  r.ball_radius_sq = M;
  return r;
}

std::vector<double> embed_point(const VariableSpace& space, Block block, std::span<const double> point) {
  if (static_cast<int>(point.size()) != space.size(block)) throw Error("point dimension does not match block");
  std::vector<double> full(space.dim(), 0.0);
  std::copy(point.begin(), point.end(), full.begin() + space.offset(block));
  return full;
}

bool contains(const SemialgebraicSet& set, std::span<const double> point, double tol) {
  const auto full = embed_point(set.space, set.block, point);
  for (const auto& g : set.inequalities) {
    if (poly_eval(g, full) < -tol) return false;
  }
  for (const auto& h : set.equalities) {
    if (std::abs(poly_eval(h, full)) > tol) return false;
  }
  return true;
}

bool ConstraintRegion::contains(std::span<const double> x, std::span<const double> omega, double tol) const {
  if (!drcc::contains(X, x, tol) || !drcc::contains(Omega, omega, tol)) return false;
  const VariableSpace& s = X.space;
  std::vector<double> full(s.dim(), 0.0);
  std::copy(x.begin(), x.end(), full.begin());
  std::copy(omega.begin(), omega.end(), full.begin() + s.offset(Block::omega));
  for (const auto& f : f_list) {
    if (poly_eval(f, full) <= tol) return true;
  }
  return false;
}

}  // namespace drcc
