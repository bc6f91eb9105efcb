#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drcc/certificate.hpp"
#include "drcc/problem.hpp"

namespace drcc {

enum class OracleMethod { closed_form, grid_mc };

std::string method_name(OracleMethod m);

struct OracleEstimate {
  std::vector<std::vector<double>> grid;
  std::vector<double> kappa_hat;
  std::vector<bool> feasible;  // kappa_hat < epsilon
  double epsilon = 0;
  OracleMethod method = OracleMethod::closed_form;
  int x_steps = 0;
  int a_steps = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  double seconds = 0;

  std::size_t feasible_count() const;
};

struct ComparisonReport {
  double coverage_ratio = 0;
  int violations = 0;
  int inner_count = 0;
  int oracle_count = 0;
  int both_count = 0;
  std::size_t grid_points = 0;
  double seconds = 0;
};

// Coefficients c_0..c_D of omega -> f(x, omega) (p = 1).
std::vector<double> omega_coefficients(const Polynomial& f, std::span<const double> x);

// Maximal intervals of {omega : sum c_k omega^k <= 0}; infinite ends allowed.
std::vector<Interval> sublevel_intervals(const std::vector<double>& coeffs);

// mu_a(K_x) for a univariate Gaussian, K_x = union over f_list of {f(x, .) <= 0}.
double gaussian_region_mass(const std::vector<Polynomial>& f_list, std::span<const double> x, double mean,
                            double sigma);

// Exact max over a box A of mu_a({f(x, .) <= 0}) for f affine in omega (box corners).
double kappa_closed_form(std::span<const double> x, const Polynomial& f, const DistributionFamily& family);

// Whether the problem admits the Gaussian exact-mass oracle (gaussian1d family, box A).
bool closed_form_available(const ProblemSpec& problem);

// Exact-mass oracle: corners for a single affine f, otherwise corners plus an a_steps grid over A.
double kappa_exact(std::span<const double> x, const ProblemSpec& problem, int a_steps);

// Max over an A grid of the fraction of samples with some f_j(x, omega) <= 0.
double kappa_grid_mc(std::span<const double> x, const ProblemSpec& problem, int a_steps, int samples,
                     std::uint64_t seed);

// Uniform grid with `steps` points per coordinate of a box X, endpoints included.
std::vector<std::vector<double>> box_grid(const SemialgebraicSet& X, int steps);

OracleEstimate feasible_set_oracle(const ProblemSpec& problem, double epsilon, int x_steps, int a_steps, int samples,
                                   std::uint64_t seed, bool force_mc = false);

// Same grid, new threshold (kappa_hat is reused).
OracleEstimate with_epsilon(const OracleEstimate& est, double epsilon);

ComparisonReport compare(const InnerApproximation& inner, const OracleEstimate& oracle);

}  // namespace drcc
