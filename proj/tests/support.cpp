#include "support.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "drcc/config.hpp"

namespace drcc::testing {

std::string source_path(const std::string& rel) { return std::string(DRCC_SOURCE_DIR) + "/" + rel; }

std::string config_path(const std::string& name) { return source_path("configs/" + name + ".json"); }

ProblemSpec example(const std::string& name) { return load_problem(config_path(name)); }

CliRun run_cli(const std::string& args) {
  CliRun r;
#ifdef DRCC_CLI_PATH
  const std::string cmd = std::string("\"") + DRCC_CLI_PATH + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
  (void)args;
#endif
  return r;
}

std::string temp_dir(const std::string& tag) {
  std::string templ = (std::filesystem::temp_directory_path() / ("drcc_" + tag + "_XXXXXX")).string();
  if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
  return templ;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Rule golub_welsch(const std::vector<double>& alpha, const std::vector<double>& beta, double mu0) {
  const int n = static_cast<int>(alpha.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = alpha[i];
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = std::sqrt(beta[i]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    r.weights.push_back(mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i));
  }
  return r;
}

Rule gauss_hermite_prob(int n) {
  std::vector<double> alpha(n, 0.0), beta(n - 1);
  for (int k = 1; k < n; ++k) beta[k - 1] = k;
  return golub_welsch(alpha, beta, 1.0);
}

Rule gauss_laguerre(int n) {
  std::vector<double> alpha(n), beta(n - 1);
  for (int k = 0; k < n; ++k) alpha[k] = 2.0 * k + 1.0;
  for (int k = 1; k < n; ++k) beta[k - 1] = static_cast<double>(k) * k;
  return golub_welsch(alpha, beta, 1.0);
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15 * tol) return left + right + diff / 15;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_step(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, depth);
}

double gaussian1d_moment(int beta, double mean, double sigma) {
  static const Rule rule = gauss_hermite_prob(24);
  double s = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(mean + sigma * rule.nodes[i], beta);
  return s;
}

double gaussian_moment(const std::vector<int>& beta, const std::vector<double>& theta,
                       const std::vector<std::vector<double>>& Sigma) {
  const int p = static_cast<int>(theta.size());
  Eigen::MatrixXd S(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) S(i, j) = Sigma[i][j];
  const Eigen::MatrixXd L = S.llt().matrixL();
  static const Rule rule = gauss_hermite_prob(12);
  const int q = static_cast<int>(rule.nodes.size());
  std::vector<int> idx(p, 0);
  double total = 0;
  while (true) {
    double w = 1;
    Eigen::VectorXd z(p);
    for (int i = 0; i < p; ++i) {
      w *= rule.weights[idx[i]];
      z(i) = rule.nodes[idx[i]];
    }
    const Eigen::VectorXd om = L * z;
    double v = w;
    for (int i = 0; i < p; ++i) v *= std::pow(theta[i] + om(i), beta[i]);
    total += v;
    int k = 0;
    while (k < p && ++idx[k] == q) idx[k++] = 0;
    if (k == p) break;
  }
  return total;
}

double exponential_moment(const std::vector<int>& beta, const std::vector<double>& means) {
  static const Rule rule = gauss_laguerre(16);
  double r = 1;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    double s = 0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * std::pow(means[i] * rule.nodes[k], beta[i]);
    r *= s;
  }
  return r;
}

double poisson_moment(int beta, double lambda) {
  double s = 0;
  for (int k = 1; k < 400; ++k) {
    const double logp = -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
    s += std::exp(logp + beta * std::log(static_cast<double>(k)));
  }
  return beta == 0 ? 1.0 : s;
}

double binomial_moment(int beta, int N, double q) {
  double s = 0;
  for (int k = 0; k <= N; ++k) {
    const double logc = std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0);
    const double pk = std::exp(logc) * std::pow(q, k) * std::pow(1 - q, N - k);
    s += pk * std::pow(static_cast<double>(k), beta);
  }
  return s;
}

}  // namespace drcc::testing
