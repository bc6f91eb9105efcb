#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace drcc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Block { x, omega, param };

std::string block_name(Block b);

// Sizes of the decision (x), noise (omega) and parameter (a) blocks.
// Global variable order is x_1..x_n, omega_1..omega_p, a_1..a_t.
class VariableSpace {
 public:
  VariableSpace() = default;
  VariableSpace(int n, int p, int t);

  int n() const { return n_; }
  int p() const { return p_; }
  int t() const { return t_; }
  int dim() const { return n_ + p_ + t_; }
  int size(Block b) const;
  int offset(Block b) const;
  int index(Block b, int i) const;
  Block block_of(int var) const;

  bool operator==(const VariableSpace&) const = default;

 private:
  int n_ = 1;
  int p_ = 1;
  int t_ = 0;
};

struct Monomial {
  std::vector<int> exps;

  Monomial() = default;
  explicit Monomial(std::vector<int> e) : exps(std::move(e)) {}
  static Monomial one(const VariableSpace& s) { return Monomial(std::vector<int>(s.dim(), 0)); }

  int degree() const;
  int degree_in(const VariableSpace& s, Block b) const;
  Monomial operator*(const Monomial& o) const;

  bool operator==(const Monomial&) const = default;
};

// Graded lexicographic: lower total degree first, ties broken so that a larger
// exponent on an earlier variable comes first ([1, x1, x2, x1^2, x1 x2, x2^2]).
struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const;
};

// Three-way grlex comparison: -1, 0 or +1.
int grlex_compare(const Monomial& a, const Monomial& b);

class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GrlexLess>;
  static constexpr double kDropTol = 1e-14;

  Polynomial() = default;
  explicit Polynomial(VariableSpace space) : space_(space) {}

  static Polynomial constant(const VariableSpace& s, double c);
  static Polynomial variable(const VariableSpace& s, int var);
  static Polynomial variable(const VariableSpace& s, Block b, int i);
  static Polynomial monomial(const VariableSpace& s, const Monomial& m, double c = 1.0);

  const VariableSpace& space() const { return space_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  int degree() const;
  int degree_in(Block b) const;
  double coefficient(const Monomial& m) const;
  // True when every term only involves variables of the listed blocks.
  bool uses_only(std::span<const Block> blocks) const;

  void add_term(const Monomial& m, double c);

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, double c) { return a *= c; }
  friend Polynomial operator*(double c, Polynomial a) { return a *= c; }

  Polynomial pow(int k) const;

  // Largest coefficient difference against another polynomial.
  double distance(const Polynomial& o) const;

 private:
  void check_space(const Polynomial& o) const;
  VariableSpace space_;
  TermMap terms_;
};

std::vector<Monomial> enumerate_monomials(const VariableSpace& space, std::span<const Block> blocks,
                                          int max_degree);

double poly_eval(const Polynomial& f, std::span<const double> point);

Polynomial poly_diff(const Polynomial& f, int var);
Polynomial poly_diff(const Polynomial& f, Block b, int i);

// Replaces variable i by subs[i] (all in the target space of subs[0]).
Polynomial poly_substitute(const Polynomial& f, std::span<const Polynomial> subs);

// Affine change of variables: variable i becomes shift[i] + scale[i] * variable i.
Polynomial poly_affine(const Polynomial& f, std::span<const double> shift, std::span<const double> scale);

// Re-embeds f into another space by mapping variable i of f to variable var_map[i] of target
// (-1 means the variable must not appear).
Polynomial poly_embed(const Polynomial& f, const VariableSpace& target, std::span<const int> var_map);

// q_beta = sigma^2 d(omega^beta f)/d omega - omega^beta f (omega - a), with the mean and
// deviation given as polynomials. Requires p = 1.
Polynomial stokes_polynomial(const Polynomial& f, int beta, const Polynomial& mean,
                             const Polynomial& sigma);

// Parameter block a = (mean, deviation), t >= 2.
Polynomial stokes_polynomial(const Polynomial& f, int beta);

std::string to_string(const Polynomial& f);

}  // namespace drcc
