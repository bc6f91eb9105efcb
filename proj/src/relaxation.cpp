#include "drcc/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace drcc {

double LebesgueMoments::at(const std::vector<int>& alpha) const {
  auto it = values.find(alpha);
  if (it == values.end()) throw Error("Lebesgue moment not available for the requested exponent");
  return it->second;
}

LebesgueMoments lebesgue_box_moments(const std::vector<Interval>& box, int max_degree) {
  const int n = static_cast<int>(box.size());
  if (n == 0) throw Error("lebesgue_box_moments: empty box");
  for (auto [lo, hi] : box)
    if (!(lo < hi)) throw Error("lebesgue_box_moments: degenerate box");
  // Per-coordinate one-dimensional moments.
  std::vector<std::vector<double>> m1(n, std::vector<double>(max_degree + 1));
  for (int i = 0; i < n; ++i) {
    auto [lo, hi] = box[i];
    for (int k = 0; k <= max_degree; ++k)
      m1[i][k] = (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / ((k + 1) * (hi - lo));
  }
  LebesgueMoments L;
  VariableSpace s(n, 1, 0);
  const Block xb[] = {Block::x};
  for (const auto& m : enumerate_monomials(s, xb, max_degree)) {
    std::vector<int> alpha(m.exps.begin(), m.exps.begin() + n);
    double v = 1;
    for (int i = 0; i < n; ++i) v *= m1[i][alpha[i]];
    L.values.emplace(std::move(alpha), v);
  }
  return L;
}

AffineMap AffineMap::identity(int dim) { return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)}; }

std::vector<double> AffineMap::to_physical(std::span<const double> z) const {
  std::vector<double> r(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) r[i] = shift[i] + scale[i] * z[i];
  return r;
}

std::vector<double> AffineMap::to_normalized(std::span<const double> z) const {
  std::vector<double> r(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) r[i] = (z[i] - shift[i]) / scale[i];
  return r;
}

Polynomial AffineMap::pull_back(const Polynomial& p) const { return poly_affine(p, shift, scale); }

Polynomial AffineMap::push_forward(const Polynomial& q) const {
  std::vector<double> s2(shift.size()), c2(scale.size());
  for (std::size_t i = 0; i < shift.size(); ++i) {
    s2[i] = -shift[i] / scale[i];
    c2[i] = 1.0 / scale[i];
  }
  return poly_affine(q, s2, c2);
}

namespace {

SemialgebraicSet pull_back_set(const SemialgebraicSet& S, const AffineMap& map) {
  SemialgebraicSet r = S;
  for (auto& g : r.inequalities) g = map.pull_back(g);
  for (auto& h : r.equalities) h = map.pull_back(h);
  if (S.box) {
    std::vector<Interval> unit(S.box->size(), {-1.0, 1.0});
    r.box = unit;
  }
  return r;
}

void set_box_map(AffineMap& map, const VariableSpace& s, Block b, const std::vector<Interval>& box) {
  for (int i = 0; i < s.size(b); ++i) {
    auto [lo, hi] = box[i];
    if (!(lo < hi)) throw Error(block_name(b) + " box: need lo < hi to normalize");
    map.shift[s.offset(b) + i] = 0.5 * (lo + hi);
    map.scale[s.offset(b) + i] = 0.5 * (hi - lo);
  }
}

// Box sets become the unit box (plus any extra equalities); every compact set gets its ball.
SemialgebraicSet normalized_set(const SemialgebraicSet& S, const AffineMap& map, std::optional<double> ball) {
  SemialgebraicSet r;
  if (S.box) {
    r = make_box(S.space, S.block, std::vector<Interval>(S.box->size(), {-1.0, 1.0}));
    for (const auto& h : S.equalities) r.equalities.push_back(map.pull_back(h));
    if (ball) return augment_ball(r, static_cast<double>(S.box->size()));
    return r;
  }
  r = pull_back_set(S, map);
  if (ball && S.dim() > 0) return augment_ball(r, *ball);
  return r;
}

double moment_box_ball(const MomentBoxSpec& mb, int p) {
  double M = 0;
  for (auto [lo, hi] : mb.mean_bounds) M += std::max(lo * lo, hi * hi);
  return M + (p * (p + 1) / 2) * mb.delta_hi * mb.delta_hi;
}

}  // namespace

NormalizedProblem normalize(const ProblemSpec& spec, int order) {
  const VariableSpace& s = spec.space;
  NormalizedProblem N;
  N.space = s;
  N.map = AffineMap::identity(s.dim());
  const bool mbox = spec.variant == Variant::moment_box;
  if (spec.X.box) set_box_map(N.map, s, Block::x, *spec.X.box);
  if (spec.Omega.box) {
    set_box_map(N.map, s, Block::omega, *spec.Omega.box);
  } else if (!mbox) {
    for (int i = 0; i < s.p(); ++i) N.map.scale[s.offset(Block::omega) + i] = spec.noise_scale;
  }
  SemialgebraicSet A = spec.param_set();
  if (!mbox && A.box) set_box_map(N.map, s, Block::param, *A.box);

  N.X = normalized_set(spec.X, N.map, spec.X.box ? std::optional<double>(1.0) : spec.X.ball_radius_sq);
  N.Omega = normalized_set(spec.Omega, N.map,
                           spec.Omega.box ? std::optional<double>(1.0) : spec.Omega.ball_radius_sq);
  std::optional<double> a_ball = A.ball_radius_sq;
  if (A.box) a_ball = 1.0;
  if (mbox) a_ball = moment_box_ball(*spec.moment_box, s.p());
  if (!a_ball && s.t() > 0) {
    // Finite parameter sets {1..k} with a single component carry no box; any radius covering 1 works.
    a_ball = 1.0 + static_cast<double>(spec.family ? spec.family->components().size() : 1) *
                       static_cast<double>(spec.family ? spec.family->components().size() : 1);
  }
  N.A = s.t() > 0 ? normalized_set(A, N.map, a_ball) : A;
  for (const auto& f : spec.f_list) N.f_list.push_back(N.map.pull_back(f));

  if (spec.X.box) {
    N.lebesgue = lebesgue_box_moments(std::vector<Interval>(s.n(), {-1.0, 1.0}), 2 * order);
  } else {
    for (const auto& e : spec.lebesgue_table) N.lebesgue.values[e.alpha] = e.value;
  }

  if (spec.family) {
    auto family = std::make_shared<DistributionFamily>(*spec.family);
    auto phys_cache = std::make_shared<std::map<std::vector<int>, Polynomial>>();
    auto norm_cache = std::make_shared<std::map<std::vector<int>, Polynomial>>();
    AffineMap map = N.map;
    auto physical = [family, phys_cache](const std::vector<int>& beta) -> const Polynomial& {
      auto it = phys_cache->find(beta);
      if (it == phys_cache->end()) it = phys_cache->emplace(beta, family->moment_polynomial(beta)).first;
      return it->second;
    };
    N.moment = [s, map, physical, norm_cache](const std::vector<int>& beta) -> const Polynomial& {
      auto it = norm_cache->find(beta);
      if (it != norm_cache->end()) return it->second;
      // E[prod ((w_i - c_i)/h_i)^beta_i] expanded over raw moments, then a pulled back.
      Polynomial P = Polynomial::constant(s, 1.0);
      for (int i = 0; i < s.p(); ++i) {
        const int v = s.offset(Block::omega) + i;
        Polynomial z = (1.0 / map.scale[v]) * (Polynomial::variable(s, v) - Polynomial::constant(s, map.shift[v]));
        P = P * z.pow(beta[i]);
      }
      Polynomial r(s);
      for (const auto& [m, c] : P.terms()) {
        std::vector<int> k(m.exps.begin() + s.offset(Block::omega), m.exps.begin() + s.offset(Block::omega) + s.p());
        r += c * physical(k);
      }
      return norm_cache->emplace(beta, map.pull_back(r)).first->second;
    };
    if (spec.family->kind() == FamilyKind::GaussianUnivariate && spec.f_list.size() == 1) {
      const Polynomial f = spec.f();
      N.stokes = [family, f, map](int beta) {
        return map.pull_back(stokes_polynomial(f, beta, family->mean_polynomial(), family->sigma_polynomial()));
      };
    }
  }
  return N;
}

int MeasureBlock::position(const Monomial& m) const {
  auto it = index.find(m);
  if (it == index.end()) throw Error("moment index out of range for measure " + label);
  return it->second;
}

int MomentRelaxation::num_moments() const {
  int n = 0;
  for (const auto& m : measures) n += m.size();
  return n;
}

int MomentRelaxation::measure_index(const std::string& label) const {
  for (std::size_t i = 0; i < measures.size(); ++i)
    if (measures[i].label == label) return static_cast<int>(i);
  throw Error("no measure labelled " + label);
}

std::vector<LinearTerm> MomentRelaxation::entry(const PsdBlockSpec& b, int r, int c) const {
  const MeasureBlock& mb = measures[b.measure];
  const Monomial rc = b.basis[r] * b.basis[c];
  std::vector<LinearTerm> out;
  out.reserve(b.multiplier.size());
  for (const auto& [g, coef] : b.multiplier.terms()) out.push_back({b.measure, mb.position(rc * g), coef});
  return out;
}

std::size_t MomentRelaxation::count_rows(RowKind k) const {
  return static_cast<std::size_t>(
      std::count_if(equalities.begin(), equalities.end(), [k](const EqualityConstraint& e) { return e.kind == k; }));
}

namespace {

class Assembler {
 public:
  Assembler(const ProblemSpec& spec, int d, Variant variant) : spec_(spec), d_(d), N_(normalize(spec, d)) {
    R_.order = d;
    R_.variant = variant;
    R_.space = spec.space;
    R_.map = N_.map;
    R_.lebesgue = N_.lebesgue;
  }

  const NormalizedProblem& normalized() const { return N_; }
  const VariableSpace& space() const { return spec_.space; }
  int d() const { return d_; }

  int add_measure(const std::string& label, std::vector<Block> blocks) {
    MeasureBlock m;
    m.label = label;
    m.blocks = std::move(blocks);
    m.max_degree = 2 * d_;
    m.monomials = enumerate_monomials(space(), m.blocks, 2 * d_);
    for (int i = 0; i < m.size(); ++i) m.index.emplace(m.monomials[i], i);
    m.offset = R_.num_moments();
    R_.measures.push_back(std::move(m));
    return static_cast<int>(R_.measures.size()) - 1;
  }

  void add_psd(int measure, const Polynomial& multiplier, const std::string& name) {
    const MeasureBlock& mb = R_.measures[measure];
    if (!multiplier.uses_only(mb.blocks))
      throw Error("localizer " + name + " uses variables outside measure " + mb.label);
    PsdBlockSpec b;
    b.name = name;
    b.measure = measure;
    b.multiplier = multiplier;
    b.order = d_ - (multiplier.degree() + 1) / 2;
    if (b.order < 0) throw Error("localizer " + name + " has degree above 2d");
    b.basis = enumerate_monomials(space(), mb.blocks, b.order);
    R_.psd_blocks.push_back(std::move(b));
  }

  void add_moment_matrix(int measure) {
    add_psd(measure, Polynomial::constant(space(), 1.0), "M(" + R_.measures[measure].label + ")");
  }

  void add_localizers(int measure, const SemialgebraicSet& S, const std::string& set_name) {
    const std::string& lab = R_.measures[measure].label;
    for (std::size_t j = 0; j < S.inequalities.size(); ++j)
      add_psd(measure, S.inequalities[j], "L(" + lab + ";" + set_name + ".g" + std::to_string(j) + ")");
    for (std::size_t j = 0; j < S.equalities.size(); ++j) {
      add_psd(measure, S.equalities[j], "L(" + lab + ";" + set_name + ".h" + std::to_string(j) + "+)");
      add_psd(measure, -S.equalities[j], "L(" + lab + ";" + set_name + ".h" + std::to_string(j) + "-)");
    }
  }

  void add_term(std::vector<LinearTerm>& terms, int measure, const Monomial& m, double coef) const {
    terms.push_back({measure, R_.measures[measure].position(m), coef});
  }

  // L_measure(mono * poly) appended with a factor.
  void add_poly(std::vector<LinearTerm>& terms, int measure, const Monomial& mono, const Polynomial& poly,
                double factor) const {
    for (const auto& [g, c] : poly.terms()) add_term(terms, measure, mono * g, factor * c);
  }

  void add_row(RowKind kind, const Monomial& key, std::vector<LinearTerm> terms, double rhs) {
    R_.equalities.push_back({kind, key, std::move(terms), rhs});
  }

  void set_objective(std::vector<int> measures) {
    for (int m : measures) R_.objective.push_back({m, 0, 1.0});
  }

  std::vector<Monomial> monomials(std::vector<Block> blocks, int deg) const {
    return enumerate_monomials(space(), blocks, deg);
  }

  std::vector<int> omega_exps(const Monomial& m) const {
    const auto& s = space();
    return {m.exps.begin() + s.offset(Block::omega), m.exps.begin() + s.offset(Block::omega) + s.p()};
  }

  Monomial x_part(const Monomial& m) const {
    Monomial r = Monomial::one(space());
    for (int i = 0; i < space().n(); ++i) r.exps[i] = m.exps[i];
    return r;
  }

  std::vector<int> x_exps(const Monomial& m) const { return {m.exps.begin(), m.exps.begin() + space().n()}; }

  MomentRelaxation take() { return std::move(R_); }
  MomentRelaxation& R() { return R_; }

 private:
  const ProblemSpec& spec_;
  int d_;
  NormalizedProblem N_;
  MomentRelaxation R_;
};

// Shared part of base/joint/stokes: y blocks, u, v with coupling and marginal rows.
struct BaseBlocks {
  std::vector<int> y;
  int u = -1;
  int v = -1;
};

BaseBlocks assemble_base_blocks(Assembler& as, const ProblemSpec& spec) {
  const NormalizedProblem& N = as.normalized();
  const int d = as.d();
  const int sf = static_cast<int>(N.f_list.size());
  BaseBlocks B;
  for (int j = 0; j < sf; ++j) B.y.push_back(as.add_measure(sf == 1 ? "y" : "y" + std::to_string(j + 1), {Block::x, Block::omega}));
  B.u = as.add_measure("u", {Block::x, Block::omega});
  B.v = as.add_measure("v", {Block::x, Block::param});

  for (int j = 0; j < sf; ++j) {
    as.add_moment_matrix(B.y[j]);
    as.add_psd(B.y[j], -N.f_list[j], "L(" + as.R().measures[B.y[j]].label + ";-f)");
    as.add_localizers(B.y[j], N.X, "X");
    as.add_localizers(B.y[j], N.Omega, "Omega");
  }
  as.add_moment_matrix(B.u);
  as.add_localizers(B.u, N.X, "X");
  as.add_localizers(B.u, N.Omega, "Omega");
  as.add_moment_matrix(B.v);
  as.add_localizers(B.v, N.X, "X");
  as.add_localizers(B.v, N.A, "A");

  const int max_moment = spec.family ? spec.family->max_moment_degree() : -1;
  for (const auto& key : as.monomials({Block::x, Block::omega}, 2 * d)) {
    const auto beta = as.omega_exps(key);
    int bsum = 0;
    for (int b : beta) bsum += b;
    if (max_moment >= 0 && bsum > max_moment)
      throw Error("family: moment map not available for |beta| = " + std::to_string(bsum) + " (needed at order " +
                  std::to_string(d) + ")");
    const Polynomial& pb = N.moment(beta);
    const Monomial xa = as.x_part(key);
    if (xa.degree() + pb.degree() > 2 * d) continue;
    std::vector<LinearTerm> terms;
    for (int y : B.y) as.add_term(terms, y, key, 1.0);
    as.add_term(terms, B.u, key, 1.0);
    as.add_poly(terms, B.v, xa, pb, -1.0);
    as.add_row(RowKind::coupling, key, std::move(terms), 0.0);
  }
  for (const auto& xa : as.monomials({Block::x}, 2 * d)) {
    std::vector<LinearTerm> terms;
    as.add_term(terms, B.v, xa, 1.0);
    as.add_row(RowKind::marginal, xa, std::move(terms), N.lebesgue.at(as.x_exps(xa)));
  }
  as.set_objective(B.y);
  return B;
}

}  // namespace

int default_beta_max(const ProblemSpec& problem, int d) { return 2 * d - problem.f().degree() - 2; }

namespace detail {

MomentRelaxation assemble_joint(const ProblemSpec& problem, int d) {
  if (d < min_relaxation_order(problem))
    throw Error("degree: order " + std::to_string(d) + " is below the minimum order " +
                std::to_string(min_relaxation_order(problem)));
  if (!problem.family) throw Error("family: required");
  Assembler as(problem, d, problem.f_list.size() > 1 ? Variant::joint : Variant::base);
  assemble_base_blocks(as, problem);
  return as.take();
}

}  // namespace detail

MomentRelaxation build_base(const ProblemSpec& problem, int d) {
  if (problem.f_list.size() != 1) throw Error("f: build_base needs exactly one f (use build_joint)");
  return detail::assemble_joint(problem, d);
}

MomentRelaxation build_joint(const ProblemSpec& problem, int d) {
  if (problem.f_list.size() < 2) throw Error("f_list: build_joint needs s_f >= 2 (use build_base)");
  return detail::assemble_joint(problem, d);
}

MomentRelaxation build_stokes(const ProblemSpec& problem, int d) {
  return build_stokes(problem, d, problem.stokes.beta_max.value_or(default_beta_max(problem, d)),
                      problem.stokes.gamma_max);
}

MomentRelaxation build_stokes(const ProblemSpec& problem, int d, int beta_max, int gamma_max) {
  if (problem.f_list.size() != 1) throw Error("f: build_stokes needs exactly one f");
  if (!problem.family || problem.family->kind() != FamilyKind::GaussianUnivariate || problem.space.p() != 1)
    throw Error("variant: stokes requires univariate Gaussian noise");
  if (d < min_relaxation_order(problem))
    throw Error("degree: order " + std::to_string(d) + " is below the minimum order " +
                std::to_string(min_relaxation_order(problem)));
  Assembler as(problem, d, Variant::stokes);
  const NormalizedProblem& N = as.normalized();
  BaseBlocks B = assemble_base_blocks(as, problem);
  const int y = B.y[0];

  const int z1 = as.add_measure("z1", {Block::x, Block::omega, Block::param});
  const int z2 = as.add_measure("z2", {Block::x, Block::param});
  as.add_moment_matrix(z1);
  as.add_psd(z1, -N.f_list[0], "L(z1;-f)");
  as.add_localizers(z1, N.X, "X");
  as.add_localizers(z1, N.Omega, "Omega");
  as.add_localizers(z1, N.A, "A");
  as.add_moment_matrix(z2);
  as.add_localizers(z2, N.X, "X");
  as.add_localizers(z2, N.A, "A");

  for (const auto& key : as.monomials({Block::x, Block::omega}, 2 * d)) {
    std::vector<LinearTerm> terms;
    as.add_term(terms, z1, key, 1.0);
    as.add_term(terms, y, key, -1.0);
    as.add_row(RowKind::stokes_y_tie, key, std::move(terms), 0.0);
  }
  for (const auto& key : as.monomials({Block::x, Block::param}, 2 * d)) {
    std::vector<LinearTerm> terms;
    as.add_term(terms, z1, key, 1.0);
    as.add_term(terms, z2, key, 1.0);
    as.add_term(terms, B.v, key, -1.0);
    as.add_row(RowKind::stokes_v_tie, key, std::move(terms), 0.0);
  }
  const auto& s = as.space();
  for (int beta = 0; beta <= beta_max; ++beta) {
    const Polynomial q = N.stokes(beta);
    if (q.is_zero()) continue;
    const int dq = q.degree();
    if (dq > 2 * d) break;
    for (const auto& key : as.monomials({Block::x, Block::param}, 2 * d - dq)) {
      if (key.degree_in(s, Block::param) > gamma_max) continue;
      std::vector<LinearTerm> terms;
      as.add_poly(terms, z1, key, q, 1.0);
      Monomial tag = key;
      tag.exps[s.offset(Block::omega)] = beta;
      as.add_row(RowKind::stokes, tag, std::move(terms), 0.0);
    }
  }
  return as.take();
}

MomentRelaxation build_moment_box(const ProblemSpec& problem, int d) {
  if (!problem.moment_box) throw Error("moment_box: required");
  if (problem.space.p() > 3) throw Error("moment_box: noise dimension p > 3 is not supported");
  if (problem.f_list.size() != 1) throw Error("f: build_moment_box needs exactly one f");
  if (d < min_relaxation_order(problem))
    throw Error("degree: order " + std::to_string(d) + " is below the minimum order " +
                std::to_string(min_relaxation_order(problem)));
  Assembler as(problem, d, Variant::moment_box);
  const NormalizedProblem& N = as.normalized();
  const auto& s = as.space();
  const int p = s.p();

  const int phi = as.add_measure("phi", {Block::x, Block::omega});
  const int nu = as.add_measure("nu", {Block::x, Block::omega});
  const int mu = as.add_measure("mu", {Block::x, Block::omega});
  const int psi = as.add_measure("psi", {Block::x, Block::param});
  as.add_moment_matrix(phi);
  as.add_psd(phi, -N.f_list[0], "L(phi;-f)");
  as.add_localizers(phi, N.X, "X");
  as.add_localizers(phi, N.Omega, "Omega");
  for (int m : {nu, mu}) {
    as.add_moment_matrix(m);
    as.add_localizers(m, N.X, "X");
    as.add_localizers(m, N.Omega, "Omega");
  }
  as.add_moment_matrix(psi);
  as.add_localizers(psi, N.X, "X");
  as.add_localizers(psi, N.A, "A");

  for (const auto& key : as.monomials({Block::x, Block::omega}, 2 * d)) {
    std::vector<LinearTerm> terms;
    as.add_term(terms, phi, key, 1.0);
    as.add_term(terms, nu, key, 1.0);
    as.add_term(terms, mu, key, -1.0);
    as.add_row(RowKind::moment_sum, key, std::move(terms), 0.0);
  }
  for (const auto& xa : as.monomials({Block::x}, 2 * d)) {
    const double lam = N.lebesgue.at(as.x_exps(xa));
    std::vector<LinearTerm> t1, t2;
    as.add_term(t1, mu, xa, 1.0);
    as.add_row(RowKind::mu_marginal, xa, std::move(t1), lam);
    as.add_term(t2, psi, xa, 1.0);
    as.add_row(RowKind::psi_marginal, xa, std::move(t2), lam);
  }
  auto mean = [&](int i) { return Polynomial::variable(s, Block::param, i); };
  auto cov = [&](int i, int j) {
    if (i > j) std::swap(i, j);
    return Polynomial::variable(s, Block::param, p + i * p - i * (i - 1) / 2 + (j - i));
  };
  for (const auto& xa : as.monomials({Block::x}, 2 * d - 2)) {
    for (int i = 0; i < p; ++i) {
      Monomial key = xa;
      key.exps[s.offset(Block::omega) + i] += 1;
      std::vector<LinearTerm> terms;
      as.add_term(terms, phi, key, 1.0);
      as.add_term(terms, nu, key, 1.0);
      as.add_poly(terms, psi, xa, mean(i), -1.0);
      as.add_row(RowKind::first_moment, key, std::move(terms), 0.0);
    }
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) {
        Monomial key = xa;
        key.exps[s.offset(Block::omega) + i] += 1;
        key.exps[s.offset(Block::omega) + j] += 1;
        std::vector<LinearTerm> terms;
        as.add_term(terms, phi, key, 1.0);
        as.add_term(terms, nu, key, 1.0);
        as.add_poly(terms, psi, xa, cov(i, j) + mean(i) * mean(j), -1.0);
        as.add_row(RowKind::second_moment, key, std::move(terms), 0.0);
      }
  }
  as.set_objective({phi});
  return as.take();
}

MomentRelaxation build_relaxation(const ProblemSpec& problem) {
  switch (problem.variant) {
    case Variant::base: return build_base(problem, problem.degree);
    case Variant::stokes: return build_stokes(problem, problem.degree);
    case Variant::joint: return build_joint(problem, problem.degree);
    case Variant::moment_box: return build_moment_box(problem, problem.degree);
  }
  throw Error("variant: unknown");
}

}  // namespace drcc
