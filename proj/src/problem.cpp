#include "drcc/problem.hpp"

#include <algorithm>
#include <functional>

namespace drcc {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::base: return "base";
    case Variant::stokes: return "stokes";
    case Variant::joint: return "joint";
    case Variant::moment_box: return "moment_box";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "base") return Variant::base;
  if (s == "stokes") return Variant::stokes;
  if (s == "joint") return Variant::joint;
  if (s == "moment_box") return Variant::moment_box;
  throw Error("variant: unknown value '" + s + "' (expected base, stokes, joint or moment_box)");
}

namespace {

// Sum of all k x k principal minors of a symmetric matrix of polynomials.
Polynomial principal_minor_sum(const std::vector<std::vector<Polynomial>>& M, int k) {
  const int p = static_cast<int>(M.size());
  const VariableSpace& s = M[0][0].space();
  Polynomial total(s);
  std::vector<int> rows;
  std::function<Polynomial(const std::vector<int>&)> det = [&](const std::vector<int>& idx) -> Polynomial {
    if (idx.size() == 1) return M[idx[0]][idx[0]];
    // Laplace expansion along the first row of the submatrix.
    Polynomial d(s);
    for (std::size_t c = 0; c < idx.size(); ++c) {
      std::vector<int> cols;
      for (std::size_t j = 0; j < idx.size(); ++j)
        if (j != c) cols.push_back(idx[j]);
      // Minor rows idx[1..], columns cols.
      std::vector<int> sub_rows(idx.begin() + 1, idx.end());
      Polynomial minor(s);
      if (sub_rows.size() == 1) {
        minor = M[sub_rows[0]][cols[0]];
      } else {
        // 2x2 is the largest remaining case for p <= 3.
        minor = M[sub_rows[0]][cols[0]] * M[sub_rows[1]][cols[1]] - M[sub_rows[0]][cols[1]] * M[sub_rows[1]][cols[0]];
      }
      Polynomial term = M[idx[0]][idx[c]] * minor;
      if (c % 2 == 0)
        d += term;
      else
        d -= term;
    }
    return d;
  };
  std::function<void(int)> choose = [&](int start) {
    if (static_cast<int>(rows.size()) == k) {
      total += det(rows);
      return;
    }
    for (int i = start; i < p; ++i) {
      rows.push_back(i);
      choose(i + 1);
      rows.pop_back();
    }
  };
  choose(0);
  return total;
}

}  // namespace

SemialgebraicSet moment_box_set(const VariableSpace& s, const MomentBoxSpec& mb) {
  const int p = s.p();
  if (p > 3) throw Error("moment_box: noise dimension p > 3 is not supported");
  if (s.t() != p + p * (p + 1) / 2) throw Error("moment_box: parameter dimension must be p + p(p+1)/2");
  if (static_cast<int>(mb.mean_bounds.size()) != p) throw Error("moment_box.mean: need p intervals");
  if (!(0 < mb.delta_lo && mb.delta_lo < mb.delta_hi)) throw Error("moment_box.delta: need 0 < lo < hi");
  SemialgebraicSet A = make_free(s, Block::param);
  for (int i = 0; i < p; ++i) {
    auto [lo, hi] = mb.mean_bounds[i];
    if (!(lo < hi)) throw Error("moment_box.mean: need lo < hi");
    Polynomial m = Polynomial::variable(s, Block::param, i);
    A.inequalities.push_back((Polynomial::constant(s, hi) - m) * (m - Polynomial::constant(s, lo)));
  }
  auto sigma = [&](int i, int j) {
    if (i > j) std::swap(i, j);
    int k = i * p - i * (i - 1) / 2 + (j - i);
    return Polynomial::variable(s, Block::param, p + k);
  };
  for (int side = 0; side < 2; ++side) {
    std::vector<std::vector<Polynomial>> M(p, std::vector<Polynomial>(p, Polynomial(s)));
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        Polynomial e = sigma(i, j);
        if (side == 0) {
          M[i][j] = e;
          if (i == j) M[i][j] -= Polynomial::constant(s, mb.delta_lo);
        } else {
          M[i][j] = -e;
          if (i == j) M[i][j] += Polynomial::constant(s, mb.delta_hi);
        }
      }
    for (int k = 1; k <= p; ++k) A.inequalities.push_back(principal_minor_sum(M, k));
  }
  // Reorder as in the two-sided listing: trace-type bounds first, then higher minors.
  std::vector<Polynomial> ordered(A.inequalities.begin(), A.inequalities.begin() + p);
  for (int k = 1; k <= p; ++k) {
    ordered.push_back(A.inequalities[p + (k - 1)]);
    ordered.push_back(A.inequalities[p + p + (k - 1)]);
  }
  A.inequalities = std::move(ordered);
  return A;
}

SemialgebraicSet ProblemSpec::param_set() const {
  if (variant == Variant::moment_box) {
    if (!moment_box) throw Error("moment_box: missing specification");
    return moment_box_set(space, *moment_box);
  }
  if (!family) throw Error("family: required");
  return family->param_set();
}

int min_relaxation_order(const ProblemSpec& spec) {
  int d = 1;
  for (const auto& f : spec.f_list) d = std::max(d, f.degree());
  d = std::max(d, spec.X.max_degree());
  d = std::max(d, spec.Omega.max_degree());
  d = std::max(d, spec.param_set().max_degree());
  return (d + 1) / 2;
}

void validate(const ProblemSpec& spec) {
  if (!(spec.epsilon > 0 && spec.epsilon < 1)) throw Error("epsilon: must lie in (0, 1)");
  if (spec.f_list.empty()) throw Error("f: required");
  const Block xo[] = {Block::x, Block::omega};
  for (const auto& f : spec.f_list) {
    if (!(f.space() == spec.space)) throw Error("f: variable space mismatch");
    if (!f.uses_only(xo)) throw Error("f: may only involve x and omega");
  }
  if (spec.X.block != Block::x) throw Error("X: block must be x");
  if (spec.Omega.block != Block::omega) throw Error("Omega: block must be omega");
  if (!spec.X.is_box() && spec.lebesgue_table.empty())
    throw Error("X: non-box sets need a lebesgue_moments table");
  if (!spec.X.is_box() && !spec.X.ball_radius_sq) throw Error("X.ball: required for non-box sets");
  switch (spec.variant) {
    case Variant::base:
    case Variant::stokes:
      if (spec.f_list.size() != 1) throw Error("f: variant " + variant_name(spec.variant) + " needs exactly one f");
      break;
    case Variant::joint:
      if (spec.f_list.size() < 2) throw Error("f_list: joint variant needs at least two constraints (use base)");
      break;
    case Variant::moment_box:
      if (!spec.moment_box) throw Error("moment_box: required for variant moment_box");
      if (spec.f_list.size() != 1) throw Error("f: variant moment_box needs exactly one f");
      break;
  }
  if (spec.variant != Variant::moment_box) {
    if (!spec.family) throw Error("family: required");
    const auto& A = spec.family->param_set();
    if (!A.is_box() && !A.ball_radius_sq && spec.space.t() > 0 &&
        spec.family->kind() != FamilyKind::FiniteList)
      throw Error("family.A.ball: required for non-box parameter sets");
  }
  if (spec.variant == Variant::stokes) {
    if (spec.family->kind() != FamilyKind::GaussianUnivariate)
      throw Error("variant: stokes requires the gaussian1d family");
  }
  if (spec.degree < min_relaxation_order(spec))
    throw Error("degree: " + std::to_string(spec.degree) + " is below the minimum order " +
                std::to_string(min_relaxation_order(spec)));
  if (spec.noise_scale <= 0) throw Error("noise_scale: must be positive");
}

}  // namespace drcc
