#include "drcc/distribution.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

namespace drcc {

std::string family_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::GaussianUnivariate: return "gaussian1d";
    case FamilyKind::GaussianMultivariate: return "gaussian";
    case FamilyKind::Exponential: return "exponential";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Binomial: return "binomial";
    case FamilyKind::FiniteList: return "finite";
    case FamilyKind::MomentTable: return "moment_table";
  }
  return "?";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task) { return splitmix64(splitmix64(seed) ^ task); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

int sym_index(int p, int i, int j) {
  if (i > j) std::swap(i, j);
  // Row-major upper triangle.
  return i * p - i * (i - 1) / 2 + (j - i);
}

// Stirling numbers of the second kind S(k, j), 0 <= j <= k.
std::vector<double> stirling2_row(int k) {
  std::vector<std::vector<double>> S(k + 1, std::vector<double>(k + 1, 0.0));
  S[0][0] = 1;
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= i; ++j) S[i][j] = j * S[i - 1][j] + S[i - 1][j - 1];
  return S[k];
}

Polynomial param_var(const VariableSpace& s, int i) { return Polynomial::variable(s, Block::param, i); }

std::vector<double> full_point_for_params(const VariableSpace& s, std::span<const double> a) {
  if (static_cast<int>(a.size()) != s.t()) throw Error("parameter vector has wrong dimension");
  std::vector<double> pt(s.dim(), 0.0);
  std::copy(a.begin(), a.end(), pt.begin() + s.offset(Block::param));
  return pt;
}

}  // namespace

DistributionFamily::DistributionFamily(FamilyKind k, const VariableSpace& s, SemialgebraicSet A)
    : kind_(k), space_(s), A_(std::move(A)) {
  if (!(A_.space == s) || A_.block != Block::param) throw Error("family: parameter set must live on the a-block");
}

void DistributionFamily::check_param_set() const {
  if (kind_ == FamilyKind::GaussianUnivariate && A_.is_box()) {
    int si = fixed_mean_ ? 0 : 1;
    if (!((*A_.box)[si].first > 0)) throw Error("A: deviation lower bound must be strictly positive");
  }
}

DistributionFamily DistributionFamily::gaussian1d(const VariableSpace& s, SemialgebraicSet A,
                                                  std::optional<double> fixed_mean) {
  if (s.p() != 1) throw Error("gaussian1d: requires p = 1");
  if (s.t() != (fixed_mean ? 1 : 2)) throw Error("gaussian1d: parameter dimension must be 2 (or 1 with fixed mean)");
  DistributionFamily f(FamilyKind::GaussianUnivariate, s, std::move(A));
  f.fixed_mean_ = fixed_mean;
  f.check_param_set();
  return f;
}

DistributionFamily DistributionFamily::gaussian(const VariableSpace& s, SemialgebraicSet A) {
  const int p = s.p();
  if (s.t() != p + p * (p + 1) / 2) throw Error("gaussian: parameter dimension must be p + p(p+1)/2");
  return DistributionFamily(FamilyKind::GaussianMultivariate, s, std::move(A));
}

DistributionFamily DistributionFamily::exponential(const VariableSpace& s, SemialgebraicSet A) {
  if (s.t() != s.p()) throw Error("exponential: parameter dimension must equal p");
  return DistributionFamily(FamilyKind::Exponential, s, std::move(A));
}

DistributionFamily DistributionFamily::poisson(const VariableSpace& s, SemialgebraicSet A) {
  if (s.p() != 1 || s.t() != 1) throw Error("poisson: requires p = 1, t = 1");
  return DistributionFamily(FamilyKind::Poisson, s, std::move(A));
}

DistributionFamily DistributionFamily::binomial(const VariableSpace& s, int N, SemialgebraicSet A) {
  if (s.p() != 1 || s.t() != 1) throw Error("binomial: requires p = 1, t = 1");
  if (N < 1) throw Error("binomial: N must be >= 1");
  DistributionFamily f(FamilyKind::Binomial, s, std::move(A));
  f.binomial_n_ = N;
  return f;
}

DistributionFamily DistributionFamily::finite(const VariableSpace& s, std::vector<FiniteComponent> components) {
  if (s.t() != 1) throw Error("finite: requires t = 1");
  const int k = static_cast<int>(components.size());
  if (k < 1) throw Error("finite: need at least one component");
  for (const auto& c : components)
    if (!c.family || c.family->space().p() != s.p()) throw Error("finite: component noise dimension mismatch");
  SemialgebraicSet A;
  if (k == 1) {
    A = make_free(s, Block::param);
  } else {
    A = make_box(s, Block::param, {{1.0, static_cast<double>(k)}});
  }
  Polynomial prod = Polynomial::constant(s, 1.0);
  for (int i = 1; i <= k; ++i) prod = prod * (param_var(s, 0) - Polynomial::constant(s, i));
  A.equalities.push_back(prod);
  DistributionFamily f(FamilyKind::FiniteList, s, std::move(A));
  f.components_ = std::move(components);
  return f;
}

DistributionFamily DistributionFamily::moment_table(const VariableSpace& s, SemialgebraicSet A,
                                                    std::map<std::vector<int>, Polynomial> table) {
  for (const auto& [b, poly] : table) {
    if (static_cast<int>(b.size()) != s.p()) throw Error("moment_table: beta length must equal p");
    if (!(poly.space() == s)) throw Error("moment_table: polynomial space mismatch");
    const Block pb[] = {Block::param};
    if (!poly.uses_only(pb)) throw Error("moment_table: polynomials must only involve a");
  }
  DistributionFamily f(FamilyKind::MomentTable, s, std::move(A));
  f.table_ = std::move(table);
  return f;
}

DistributionFamily DistributionFamily::with_param_set(SemialgebraicSet A) const {
  DistributionFamily f = *this;
  f.A_ = std::move(A);
  return f;
}

Polynomial DistributionFamily::mean_polynomial() const {
  if (kind_ != FamilyKind::GaussianUnivariate) throw Error("mean_polynomial: univariate Gaussian only");
  if (fixed_mean_) return Polynomial::constant(space_, *fixed_mean_);
  return param_var(space_, 0);
}

Polynomial DistributionFamily::sigma_polynomial() const {
  if (kind_ != FamilyKind::GaussianUnivariate) throw Error("sigma_polynomial: univariate Gaussian only");
  return param_var(space_, fixed_mean_ ? 0 : 1);
}

double DistributionFamily::mean_at(std::span<const double> a) const {
  return fixed_mean_ ? *fixed_mean_ : a[0];
}

double DistributionFamily::sigma_at(std::span<const double> a) const { return fixed_mean_ ? a[0] : a[1]; }

int DistributionFamily::max_moment_degree() const {
  if (kind_ == FamilyKind::MomentTable) {
    // Largest k such that every beta with |beta| <= k is present.
    int k = 0;
    while (true) {
      const int next = k + 1;
      std::vector<int> beta(space_.p(), 0);
      bool all = true;
      std::function<void(int, int)> rec = [&](int pos, int rem) {
        if (!all) return;
        if (pos + 1 == space_.p()) {
          beta[pos] = rem;
          if (!table_.count(beta)) all = false;
          return;
        }
        for (int e = rem; e >= 0; --e) {
          beta[pos] = e;
          rec(pos + 1, rem - e);
        }
      };
      rec(0, next);
      if (!all) return k;
      k = next;
      if (k > 64) return k;
    }
  }
  return -1;
}

namespace {

// E[z_{i1} ... z_{ik}] for z ~ N(0, Sigma), Sigma read from the a-block.
Polynomial isserlis(const VariableSpace& s, std::vector<int> idx, std::map<std::vector<int>, Polynomial>& memo) {
  if (idx.empty()) return Polynomial::constant(s, 1.0);
  if (idx.size() % 2 == 1) return Polynomial(s);
  std::sort(idx.begin(), idx.end());
  if (auto it = memo.find(idx); it != memo.end()) return it->second;
  const int p = s.p();
  Polynomial r(s);
  for (std::size_t j = 1; j < idx.size(); ++j) {
    std::vector<int> rest;
    for (std::size_t k = 1; k < idx.size(); ++k)
      if (k != j) rest.push_back(idx[k]);
    r += param_var(s, p + sym_index(p, idx[0], idx[j])) * isserlis(s, rest, memo);
  }
  memo.emplace(idx, r);
  return r;
}

}  // namespace

Polynomial DistributionFamily::moment_polynomial(std::span<const int> beta) const {
  const VariableSpace& s = space_;
  if (static_cast<int>(beta.size()) != s.p()) throw Error("moment_polynomial: beta length must equal p");
  for (int b : beta)
    if (b < 0) throw Error("moment_polynomial: beta must be nonnegative");
  const int total = std::accumulate(beta.begin(), beta.end(), 0);
  if (total == 0) return Polynomial::constant(s, 1.0);

  switch (kind_) {
    case FamilyKind::GaussianUnivariate: {
      const Polynomial a = mean_polynomial();
      const Polynomial s2 = sigma_polynomial() * sigma_polynomial();
      Polynomial m0 = Polynomial::constant(s, 1.0), m1 = a;
      for (int k = 2; k <= total; ++k) {
        Polynomial m2 = a * m1 + static_cast<double>(k - 1) * (s2 * m0);
        m0 = std::move(m1);
        m1 = std::move(m2);
      }
      return m1;
    }
    case FamilyKind::GaussianMultivariate: {
      std::vector<int> factors;
      for (int i = 0; i < s.p(); ++i)
        for (int e = 0; e < beta[i]; ++e) factors.push_back(i);
      const int k = static_cast<int>(factors.size());
      std::map<std::vector<int>, Polynomial> memo;
      Polynomial r(s);
      for (int mask = 0; mask < (1 << k); ++mask) {
        std::vector<int> zs;
        Polynomial term = Polynomial::constant(s, 1.0);
        for (int j = 0; j < k; ++j) {
          if (mask & (1 << j))
            zs.push_back(factors[j]);
          else
            term = term * param_var(s, factors[j]);
        }
        if (zs.size() % 2 == 1) continue;
        r += term * isserlis(s, zs, memo);
      }
      return r;
    }
    case FamilyKind::Exponential: {
      Polynomial r = Polynomial::constant(s, 1.0);
      for (int i = 0; i < s.p(); ++i) {
        double fact = 1;
        for (int j = 2; j <= beta[i]; ++j) fact *= j;
        r = r * (fact * param_var(s, i).pow(beta[i]));
      }
      return r;
    }
    case FamilyKind::Poisson: {
      const auto S = stirling2_row(total);
      Polynomial r(s);
      for (int j = 1; j <= total; ++j) r += S[j] * param_var(s, 0).pow(j);
      return r;
    }
    case FamilyKind::Binomial: {
      const auto S = stirling2_row(total);
      Polynomial r(s);
      double falling = 1;
      for (int j = 1; j <= total && j <= binomial_n_; ++j) {
        falling *= (binomial_n_ - j + 1);
        r += (S[j] * falling) * param_var(s, 0).pow(j);
      }
      return r;
    }
    case FamilyKind::FiniteList: {
      const int k = static_cast<int>(components_.size());
      Polynomial r(s);
      for (int i = 1; i <= k; ++i) {
        const auto& c = components_[i - 1];
        const Polynomial pc = c.family->moment_polynomial(beta);
        const double mi = poly_eval(pc, full_point_for_params(c.family->space(), c.a));
        Polynomial lag = Polynomial::constant(s, 1.0);
        for (int j = 1; j <= k; ++j) {
          if (j == i) continue;
          lag = lag * ((1.0 / (i - j)) * (param_var(s, 0) - Polynomial::constant(s, j)));
        }
        r += mi * lag;
      }
      return r;
    }
    case FamilyKind::MomentTable: {
      std::vector<int> key(beta.begin(), beta.end());
      auto it = table_.find(key);
      if (it == table_.end()) {
        std::string b;
        for (int v : key) b += (b.empty() ? "" : ",") + std::to_string(v);
        throw Error("moment_table: missing entry for beta = (" + b + ")");
      }
      return it->second;
    }
  }
  throw Error("moment_polynomial: unknown family");
}

std::vector<NoiseSample> DistributionFamily::sample(std::span<const double> a, int count, std::uint64_t seed) const {
  if (count < 0) throw Error("sample: negative count");
  if (static_cast<int>(a.size()) != space_.t()) throw Error("sample: parameter vector has wrong dimension");
  if (!contains(A_, a, 1e-9)) throw Error("sample: parameter outside A");
  if (!can_sample()) throw Error("sample: moment_table families cannot be sampled");
  std::vector<NoiseSample> out;
  out.reserve(count);
  std::mt19937_64 rng(seed);
  const int p = space_.p();
  auto push = [&](std::vector<double> v) { out.push_back({std::move(v), seed}); };
  switch (kind_) {
    case FamilyKind::GaussianUnivariate: {
      std::normal_distribution<double> nd(mean_at(a), sigma_at(a));
      for (int i = 0; i < count; ++i) push({nd(rng)});
      break;
    }
    case FamilyKind::GaussianMultivariate: {
      Eigen::MatrixXd S(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) S(i, j) = a[p + sym_index(p, i, j)];
      Eigen::LLT<Eigen::MatrixXd> llt(S);
      if (llt.info() != Eigen::Success) throw Error("sample: covariance is not positive definite");
      Eigen::MatrixXd L = llt.matrixL();
      std::normal_distribution<double> nd(0.0, 1.0);
      Eigen::VectorXd z(p);
      for (int i = 0; i < count; ++i) {
        for (int j = 0; j < p; ++j) z(j) = nd(rng);
        Eigen::VectorXd w = L * z;
        std::vector<double> v(p);
        for (int j = 0; j < p; ++j) v[j] = a[j] + w(j);
        push(std::move(v));
      }
      break;
    }
    case FamilyKind::Exponential: {
      std::vector<std::exponential_distribution<double>> ed;
      for (int j = 0; j < p; ++j) ed.emplace_back(1.0 / a[j]);
      for (int i = 0; i < count; ++i) {
        std::vector<double> v(p);
        for (int j = 0; j < p; ++j) v[j] = ed[j](rng);
        push(std::move(v));
      }
      break;
    }
    case FamilyKind::Poisson: {
      std::poisson_distribution<long> pd(a[0]);
      for (int i = 0; i < count; ++i) push({static_cast<double>(pd(rng))});
      break;
    }
    case FamilyKind::Binomial: {
      std::binomial_distribution<int> bd(binomial_n_, a[0]);
      for (int i = 0; i < count; ++i) push({static_cast<double>(bd(rng))});
      break;
    }
    case FamilyKind::FiniteList: {
      const int idx = static_cast<int>(std::lround(a[0])) - 1;
      const auto& c = components_.at(idx);
      auto inner = c.family->sample(c.a, count, seed);
      for (auto& s : inner) push(std::move(s.value));
      break;
    }
    case FamilyKind::MomentTable: break;
  }
  return out;
}

bool DistributionFamily::has_closed_form_cdf() const {
  return kind_ == FamilyKind::GaussianUnivariate || (kind_ == FamilyKind::Exponential && space_.p() == 1);
}

double DistributionFamily::tail_probability(std::span<const double> a, double lo, double hi) const {
  if (!has_closed_form_cdf()) throw Error("tail_probability: no closed-form CDF for family " + family_name(kind_));
  if (lo > hi) throw Error("tail_probability: need lo <= hi");
  if (kind_ == FamilyKind::GaussianUnivariate) {
    const double m = mean_at(a), s = sigma_at(a);
    const double zl = std::isinf(lo) ? (lo < 0 ? -INFINITY : INFINITY) : (lo - m) / s;
    const double zh = std::isinf(hi) ? (hi < 0 ? -INFINITY : INFINITY) : (hi - m) / s;
    // Upper tails through erfc keep accuracy far from the mean.
    if (zl > 0) return 0.5 * std::erfc(zl / std::sqrt(2.0)) - 0.5 * std::erfc(zh / std::sqrt(2.0));
    return normal_cdf(zh) - normal_cdf(zl);
  }
  auto cdf = [&](double x) { return x <= 0 ? 0.0 : (std::isinf(x) ? 1.0 : -std::expm1(-x / a[0])); };
  return cdf(hi) - cdf(lo);
}

SemialgebraicSet DistributionFamily::default_omega() const {
  const VariableSpace& s = space_;
  switch (kind_) {
    case FamilyKind::Exponential:
    case FamilyKind::Poisson: {
      SemialgebraicSet O = make_free(s, Block::omega);
      for (int i = 0; i < s.p(); ++i) O.inequalities.push_back(Polynomial::variable(s, Block::omega, i));
      return O;
    }
    case FamilyKind::Binomial: return make_box(s, Block::omega, {{0.0, static_cast<double>(binomial_n_)}});
    default: return make_free(s, Block::omega);
  }
}

}  // namespace drcc
