#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "drcc/polynomial.hpp"
#include "drcc/semialgebraic.hpp"

namespace drcc {

enum class FamilyKind {
  GaussianUnivariate,
  GaussianMultivariate,
  Exponential,
  Poisson,
  Binomial,
  FiniteList,
  MomentTable
};

std::string family_name(FamilyKind k);

struct NoiseSample {
  std::vector<double> value;
  std::uint64_t seed_tag = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
// Per-task seed, independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task);

double normal_cdf(double z);

class DistributionFamily;

struct FiniteComponent {
  std::shared_ptr<const DistributionFamily> family;
  std::vector<double> a;
};

// Parametrized family mu_a with polynomial moment map beta -> p_beta(a).
class DistributionFamily {
 public:
  // a = (mean, deviation), or a = (deviation) when the mean is fixed.
  static DistributionFamily gaussian1d(const VariableSpace& s, SemialgebraicSet A,
                                       std::optional<double> fixed_mean = std::nullopt);
  // a = (theta_1..theta_p, Sigma upper triangle row-major).
  static DistributionFamily gaussian(const VariableSpace& s, SemialgebraicSet A);
  // Independent exponentials with means a_1..a_p.
  static DistributionFamily exponential(const VariableSpace& s, SemialgebraicSet A);
  static DistributionFamily poisson(const VariableSpace& s, SemialgebraicSet A);
  static DistributionFamily binomial(const VariableSpace& s, int N, SemialgebraicSet A);
  // a ranges over {1..k}; A is built as {prod (a - i) = 0} intersected with [1, k].
  static DistributionFamily finite(const VariableSpace& s, std::vector<FiniteComponent> components);
  static DistributionFamily moment_table(const VariableSpace& s, SemialgebraicSet A,
                                         std::map<std::vector<int>, Polynomial> table);

  FamilyKind kind() const { return kind_; }
  const VariableSpace& space() const { return space_; }
  int param_dim() const { return space_.t(); }
  const SemialgebraicSet& param_set() const { return A_; }
  std::optional<double> fixed_mean() const { return fixed_mean_; }
  int binomial_n() const { return binomial_n_; }
  const std::vector<FiniteComponent>& components() const { return components_; }
  const std::map<std::vector<int>, Polynomial>& table() const { return table_; }

  // Replaces the parameter set (used when normalizing coordinates).
  DistributionFamily with_param_set(SemialgebraicSet A) const;

  Polynomial moment_polynomial(std::span<const int> beta) const;
  // Largest total degree for which every moment polynomial is defined (-1 if unbounded).
  int max_moment_degree() const;

  std::vector<NoiseSample> sample(std::span<const double> a, int count, std::uint64_t seed) const;
  bool can_sample() const { return kind_ != FamilyKind::MomentTable; }

  bool has_closed_form_cdf() const;
  // Mass of (lo, hi] under mu_a.
  double tail_probability(std::span<const double> a, double lo, double hi) const;

  // Univariate Gaussian mean and deviation as polynomials in a.
  Polynomial mean_polynomial() const;
  Polynomial sigma_polynomial() const;
  double mean_at(std::span<const double> a) const;
  double sigma_at(std::span<const double> a) const;

  // Natural support of the noise (R^p unless the family is supported on a half-line or interval).
  SemialgebraicSet default_omega() const;

 private:
  DistributionFamily(FamilyKind k, const VariableSpace& s, SemialgebraicSet A);
  void check_param_set() const;

  FamilyKind kind_;
  VariableSpace space_;
  SemialgebraicSet A_;
  std::optional<double> fixed_mean_;
  int binomial_n_ = 0;
  std::vector<FiniteComponent> components_;
  std::map<std::vector<int>, Polynomial> table_;
};

}  // namespace drcc
