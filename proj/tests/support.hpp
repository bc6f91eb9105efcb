#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "drcc/problem.hpp"

namespace drcc::testing {

std::string source_path(const std::string& rel);
std::string config_path(const std::string& name);
ProblemSpec example(const std::string& name);

struct CliRun {
  int code = -1;
  std::string output;  // stdout and stderr
};
CliRun run_cli(const std::string& args);
std::string temp_dir(const std::string& tag);
std::string read_text(const std::string& path);

// Gauss rule from the three-term recurrence (diagonal alpha, off-diagonal sqrt(beta)), total mass mu0.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Rule golub_welsch(const std::vector<double>& alpha, const std::vector<double>& beta, double mu0);
Rule gauss_hermite_prob(int n);  // weight exp(-x^2/2)/sqrt(2 pi)
Rule gauss_laguerre(int n);      // weight exp(-x) on [0, inf)

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50);

// Independent moment values E[omega^beta] used to check the moment polynomials.
double gaussian1d_moment(int beta, double mean, double sigma);
double gaussian_moment(const std::vector<int>& beta, const std::vector<double>& theta,
                       const std::vector<std::vector<double>>& Sigma);
double exponential_moment(const std::vector<int>& beta, const std::vector<double>& means);
double poisson_moment(int beta, double lambda);
double binomial_moment(int beta, int N, double q);

}  // namespace drcc::testing
