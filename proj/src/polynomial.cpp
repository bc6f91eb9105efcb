#include "drcc/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace drcc {

std::string block_name(Block b) {
  switch (b) {
    case Block::x: return "x";
    case Block::omega: return "omega";
    case Block::param: return "a";
  }
  return "?";
}

VariableSpace::VariableSpace(int n, int p, int t) : n_(n), p_(p), t_(t) {
  if (n < 1 || p < 1 || t < 0) throw Error("VariableSpace: need n >= 1, p >= 1, t >= 0");
}

int VariableSpace::size(Block b) const {
  switch (b) {
    case Block::x: return n_;
    case Block::omega: return p_;
    case Block::param: return t_;
  }
  return 0;
}

int VariableSpace::offset(Block b) const {
  switch (b) {
    case Block::x: return 0;
    case Block::omega: return n_;
    case Block::param: return n_ + p_;
  }
  return 0;
}

int VariableSpace::index(Block b, int i) const {
  if (i < 0 || i >= size(b)) throw Error("variable index out of range in block " + block_name(b));
  return offset(b) + i;
}

Block VariableSpace::block_of(int var) const {
  if (var < 0 || var >= dim()) throw Error("variable index out of range");
  if (var < n_) return Block::x;
  if (var < n_ + p_) return Block::omega;
  return Block::param;
}

int Monomial::degree() const {
  int d = 0;
  for (int e : exps) d += e;
  return d;
}

int Monomial::degree_in(const VariableSpace& s, Block b) const {
  int d = 0;
  for (int i = 0; i < s.size(b); ++i) d += exps[s.offset(b) + i];
  return d;
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial r(exps);
  for (std::size_t i = 0; i < exps.size(); ++i) r.exps[i] += o.exps[i];
  return r;
}

int grlex_compare(const Monomial& a, const Monomial& b) {
  int da = a.degree(), db = b.degree();
  if (da != db) return da < db ? -1 : 1;
  for (std::size_t i = 0; i < a.exps.size(); ++i) {
    if (a.exps[i] != b.exps[i]) return a.exps[i] > b.exps[i] ? -1 : 1;
  }
  return 0;
}

bool GrlexLess::operator()(const Monomial& a, const Monomial& b) const { return grlex_compare(a, b) < 0; }

std::size_t MonomialHash::operator()(const Monomial& m) const {
  std::size_t h = 1469598103934665603ull;
  for (int e : m.exps) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ull;
    h *= 1099511628211ull;
  }
  return h;
}

Polynomial Polynomial::constant(const VariableSpace& s, double c) {
  Polynomial p(s);
  p.add_term(Monomial::one(s), c);
  return p;
}

Polynomial Polynomial::variable(const VariableSpace& s, int var) {
  if (var < 0 || var >= s.dim()) throw Error("variable index out of range");
  Monomial m = Monomial::one(s);
  m.exps[var] = 1;
  return monomial(s, m, 1.0);
}

Polynomial Polynomial::variable(const VariableSpace& s, Block b, int i) { return variable(s, s.index(b, i)); }

Polynomial Polynomial::monomial(const VariableSpace& s, const Monomial& m, double c) {
  if (static_cast<int>(m.exps.size()) != s.dim()) throw Error("monomial length does not match space");
  Polynomial p(s);
  p.add_term(m, c);
  return p;
}

int Polynomial::degree() const {
  // Terms are grlex ordered, so the last one has the highest degree.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

int Polynomial::degree_in(Block b) const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree_in(space_, b));
  return d;
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

bool Polynomial::uses_only(std::span<const Block> blocks) const {
  for (const auto& [m, c] : terms_) {
    for (int v = 0; v < space_.dim(); ++v) {
      if (m.exps[v] == 0) continue;
      if (std::find(blocks.begin(), blocks.end(), space_.block_of(v)) == blocks.end()) return false;
    }
  }
  return true;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (static_cast<int>(m.exps.size()) != space_.dim()) throw Error("monomial length does not match space");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kDropTol) terms_.erase(it);
}

void Polynomial::check_space(const Polynomial& o) const {
  if (!(space_ == o.space_)) throw Error("polynomials live in different variable spaces");
}

Polynomial Polynomial::operator-() const {
  Polynomial r(*this);
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  check_space(o);
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  check_space(o);
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= c;
    if (std::abs(it->second) < kDropTol)
      it = terms_.erase(it);
    else
      ++it;
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.check_space(b);
  Polynomial r(a.space_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      Monomial m = ma * mb;
      auto [it, inserted] = r.terms_.try_emplace(std::move(m), ca * cb);
      if (!inserted) it->second += ca * cb;
    }
  }
  for (auto it = r.terms_.begin(); it != r.terms_.end();) {
    if (std::abs(it->second) < Polynomial::kDropTol)
      it = r.terms_.erase(it);
    else
      ++it;
  }
  return r;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw Error("negative power");
  Polynomial r = constant(space_, 1.0);
  Polynomial base = *this;
  while (k > 0) {
    if (k & 1) r = r * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return r;
}

double Polynomial::distance(const Polynomial& o) const {
  Polynomial d = *this - o;
  double m = 0;
  for (const auto& [mono, c] : d.terms_) m = std::max(m, std::abs(c));
  return m;
}

namespace {

void enumerate_degree(const std::vector<int>& vars, std::size_t pos, int remaining, Monomial& cur,
                      std::vector<Monomial>& out) {
  if (pos + 1 == vars.size()) {
    cur.exps[vars[pos]] = remaining;
    out.push_back(cur);
    cur.exps[vars[pos]] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur.exps[vars[pos]] = e;
    enumerate_degree(vars, pos + 1, remaining - e, cur, out);
  }
  cur.exps[vars[pos]] = 0;
}

}  // namespace

std::vector<Monomial> enumerate_monomials(const VariableSpace& space, std::span<const Block> blocks,
                                          int max_degree) {
  if (max_degree < 0) throw Error("enumerate_monomials: negative degree");
  std::vector<int> vars;
  for (Block b : {Block::x, Block::omega, Block::param}) {
    if (std::find(blocks.begin(), blocks.end(), b) == blocks.end()) continue;
    for (int i = 0; i < space.size(b); ++i) vars.push_back(space.offset(b) + i);
  }
  std::vector<Monomial> out;
  Monomial cur = Monomial::one(space);
  out.push_back(cur);
  if (vars.empty()) return out;
  for (int k = 1; k <= max_degree; ++k) enumerate_degree(vars, 0, k, cur, out);
  return out;
}

double poly_eval(const Polynomial& f, std::span<const double> point) {
  const int dim = f.space().dim();
  if (static_cast<int>(point.size()) != dim) throw Error("poly_eval: point dimension mismatch");
  double s = 0;
  for (const auto& [m, c] : f.terms()) {
    double v = c;
    for (int i = 0; i < dim; ++i) {
      for (int e = 0; e < m.exps[i]; ++e) v *= point[i];
    }
    s += v;
  }
  return s;
}

Polynomial poly_diff(const Polynomial& f, int var) {
  if (var < 0 || var >= f.space().dim()) throw Error("poly_diff: variable index out of range");
  Polynomial r(f.space());
  for (const auto& [m, c] : f.terms()) {
    if (m.exps[var] == 0) continue;
    Monomial d = m;
    d.exps[var] -= 1;
    r.add_term(d, c * m.exps[var]);
  }
  return r;
}

Polynomial poly_diff(const Polynomial& f, Block b, int i) { return poly_diff(f, f.space().index(b, i)); }

Polynomial poly_substitute(const Polynomial& f, std::span<const Polynomial> subs) {
  const int dim = f.space().dim();
  if (static_cast<int>(subs.size()) != dim) throw Error("poly_substitute: need one polynomial per variable");
  const VariableSpace& target = subs[0].space();
  // Powers are cached per variable since high-degree terms reuse them.
  std::vector<std::vector<Polynomial>> powers(dim);
  auto power = [&](int v, int k) -> const Polynomial& {
    auto& cache = powers[v];
    if (cache.empty()) cache.push_back(Polynomial::constant(target, 1.0));
    while (static_cast<int>(cache.size()) <= k) cache.push_back(cache.back() * subs[v]);
    return cache[k];
  };
  Polynomial r(target);
  for (const auto& [m, c] : f.terms()) {
    Polynomial t = Polynomial::constant(target, c);
    for (int v = 0; v < dim; ++v) {
      if (m.exps[v] > 0) t = t * power(v, m.exps[v]);
    }
    r += t;
  }
  return r;
}

Polynomial poly_affine(const Polynomial& f, std::span<const double> shift, std::span<const double> scale) {
  const VariableSpace& s = f.space();
  std::vector<Polynomial> subs;
  subs.reserve(s.dim());
  for (int v = 0; v < s.dim(); ++v)
    subs.push_back(Polynomial::constant(s, shift[v]) + scale[v] * Polynomial::variable(s, v));
  return poly_substitute(f, subs);
}

Polynomial poly_embed(const Polynomial& f, const VariableSpace& target, std::span<const int> var_map) {
  Polynomial r(target);
  for (const auto& [m, c] : f.terms()) {
    Monomial t = Monomial::one(target);
    for (int v = 0; v < f.space().dim(); ++v) {
      if (m.exps[v] == 0) continue;
      if (var_map[v] < 0) throw Error("poly_embed: variable has no image in target space");
      t.exps[var_map[v]] += m.exps[v];
    }
    r.add_term(t, c);
  }
  return r;
}

Polynomial stokes_polynomial(const Polynomial& f, int beta, const Polynomial& mean, const Polynomial& sigma) {
  const VariableSpace& s = f.space();
  if (s.p() != 1) throw Error("stokes_polynomial: requires univariate noise (p = 1)");
  if (beta < 0) throw Error("stokes_polynomial: beta must be >= 0");
  const Polynomial w = Polynomial::variable(s, Block::omega, 0);
  const Polynomial wf = w.pow(beta) * f;
  return sigma * sigma * poly_diff(wf, Block::omega, 0) - wf * (w - mean);
}

Polynomial stokes_polynomial(const Polynomial& f, int beta) {
  const VariableSpace& s = f.space();
  if (s.t() < 2) throw Error("stokes_polynomial: parameter block must hold (mean, deviation)");
  return stokes_polynomial(f, beta, Polynomial::variable(s, Block::param, 0),
                           Polynomial::variable(s, Block::param, 1));
}

std::string to_string(const Polynomial& f) {
  if (f.is_zero()) return "0";
  std::ostringstream os;
  os.precision(12);
  const VariableSpace& s = f.space();
  bool first = true;
  for (const auto& [m, c] : f.terms()) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    double a = std::abs(c);
    bool unit = m.degree() > 0 && a == 1.0;
    if (!unit) os << a;
    bool need_star = !unit;
    for (int v = 0; v < s.dim(); ++v) {
      if (m.exps[v] == 0) continue;
      Block b = s.block_of(v);
      if (need_star) os << "*";
      os << block_name(b) << (v - s.offset(b) + 1);
      if (m.exps[v] > 1) os << "^" << m.exps[v];
      need_star = true;
    }
  }
  return os.str();
}

}  // namespace drcc
