// Command-line driver: solve, eval, oracle, compare.
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "drcc/config.hpp"

using namespace drcc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

std::string strip_json(const std::string& path) {
  const std::string ext = ".json";
  if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
    return path.substr(0, path.size() - ext.size());
  return path;
}

SolverSettings settings_from_env(bool verbose) {
  SolverSettings s;
  s.verbose = verbose;
  if (const char* tol = std::getenv("DRCC_SOLVER_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(tol, &end);
    if (end == tol || !(v > 0) || v >= 1) throw ConfigError("DRCC_SOLVER_TOL: expected a number in (0, 1)");
    s.gap_tol = v;
    s.feas_tol = v;
  }
  return s;
}

void check_epsilon(double e) {
  if (!(e > 0 && e < 1)) throw ConfigError("epsilon: must lie in (0, 1)");
}

// "N" (N points per coordinate of the box X) or "lo:hi:N[,lo:hi:N...]".
std::vector<std::vector<double>> parse_grid(const std::string& spec, const SemialgebraicSet& X) {
  if (spec.find(':') == std::string::npos) {
    int n = 0;
    try {
      n = std::stoi(spec);
    } catch (const std::exception&) {
      throw ConfigError("--grid: expected N or lo:hi:N[,...]");
    }
    if (n < 1) throw ConfigError("--grid: need at least one point");
    if (!X.is_box()) throw ConfigError("--grid: X is not a box; give explicit ranges");
    return box_grid(X, n);
  }
  std::vector<Interval> box;
  std::vector<int> steps;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    double lo, hi;
    int n;
    char c1, c2;
    std::stringstream ps(part);
    if (!(ps >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1)
      throw ConfigError("--grid: bad range '" + part + "'");
    box.push_back({lo, hi});
    steps.push_back(n);
  }
  if (static_cast<int>(box.size()) != X.dim()) throw ConfigError("--grid: one range per x coordinate");
  std::vector<std::vector<double>> pts{{}};
  for (std::size_t k = 0; k < box.size(); ++k) {
    std::vector<std::vector<double>> next;
    for (const auto& p : pts)
      for (int i = 0; i < steps[k]; ++i) {
        auto q = p;
        const auto [lo, hi] = box[k];
        q.push_back(steps[k] == 1 ? lo : lo + (hi - lo) * i / (steps[k] - 1));
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

json manifest(const std::string& command, const std::string& input, const std::string& input_hash,
              const std::vector<std::pair<std::string, std::string>>& artifacts, const json& timings) {
  json m;
  m["tool_version"] = kToolVersion;
  m["command"] = command;
  m["input"] = {{"path", input}, {"hash", input_hash}};
  json a = json::array();
  for (const auto& [path, content] : artifacts) a.push_back({{"path", path}, {"hash", hash_bytes(content)}});
  m["artifacts"] = a;
  m["timings"] = timings;
  return m;
}

void emit(const std::string& command, const std::string& input, const std::string& manifest_path,
          const std::vector<std::pair<std::string, std::string>>& artifacts, json timings) {
  const auto t0 = Clock::now();
  for (const auto& [path, content] : artifacts) write_file_atomic(path, content);
  timings["write"] = since(t0);
  const std::string input_hash = hash_bytes(slurp(input));
  write_file_atomic(manifest_path, manifest(command, input, input_hash, artifacts, timings).dump(2) + "\n");
}

struct SolveArgs {
  std::string config;
  std::optional<int> degree;
  std::string variant;
  std::optional<double> epsilon;
  std::string out;
  std::string dump;
  bool verbose = false;
};

int cmd_solve(const SolveArgs& a) {
  auto t0 = Clock::now();
  ProblemSpec spec = load_problem(a.config);
  if (a.degree) spec.degree = *a.degree;
  if (!a.variant.empty()) spec.variant = parse_variant(a.variant);
  if (a.epsilon) spec.epsilon = *a.epsilon;
  try {
    validate(spec);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  json timings;
  timings["parse"] = since(t0);
  t0 = Clock::now();
  const MomentRelaxation R = build_relaxation(spec);
  timings["build"] = since(t0);
  std::vector<std::pair<std::string, std::string>> artifacts;
  if (!a.dump.empty()) artifacts.push_back({a.dump, conic_to_json(to_conic(R), R).dump() + "\n"});
  t0 = Clock::now();
  const SolveResult r = solve(R, settings_from_env(a.verbose));
  timings["solve"] = since(t0);
  const std::string out =
      a.out.empty() ? spec.name + "_" + variant_name(spec.variant) + "_d" + std::to_string(spec.degree) + ".json" : a.out;
  artifacts.insert(artifacts.begin(), {out, result_to_json(r, spec).dump(2) + "\n"});
  emit("solve", a.config, strip_json(out) + ".manifest.json", artifacts, timings);
  std::cout << "status " << status_name(r.status) << "  rho_d " << fmt(r.rho_d) << "  order " << r.order
            << "  iterations " << r.iterations << "  rel_gap " << r.rel_gap << "  seconds " << r.seconds << "\n"
            << "wrote " << out << "\n";
  return r.usable() ? kExitOk : kExitSolver;
}

struct EvalArgs {
  std::string result;
  std::string grid;
  std::optional<double> epsilon;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  auto t0 = Clock::now();
  const json j = read_json_file(a.result);
  if (!j.contains("dims") || !j.contains("X")) throw ConfigError("result: missing dims or X");
  const VariableSpace space(j["dims"]["n"].get<int>(), j["dims"]["p"].get<int>(), j["dims"]["t"].get<int>());
  const SolveResult r = result_from_json(j, space);
  const SemialgebraicSet X = set_from_json(j["X"], space, Block::x, "result.X");
  const double eps = a.epsilon ? *a.epsilon : j.value("epsilon", 0.0);
  check_epsilon(eps);
  if (!r.usable()) throw ConfigError("result: status " + status_name(r.status) + " carries no certificate");
  const InnerApproximation inner = extract_inner(r, eps, X);
  const std::string grid_spec = a.grid.empty() ? "201" : a.grid;
  const auto grid = parse_grid(grid_spec, X);
  json timings;
  timings["parse"] = since(t0);
  t0 = Clock::now();
  std::ostringstream csv;
  csv << std::setprecision(12);
  for (int i = 0; i < space.n(); ++i) csv << "x" << i + 1 << ",";
  csv << "w,member\n";
  std::size_t members = 0;
  for (const auto& x : grid) {
    for (double v : x) csv << v << ",";
    const bool in = inner.contains(x);
    members += in;
    csv << inner.value(x) << "," << (in ? 1 : 0) << "\n";
  }
  const std::string out = a.out.empty() ? strip_json(a.result) + "_eval.csv" : a.out;
  std::vector<std::pair<std::string, std::string>> artifacts{{out, csv.str()}};
  if (space.n() == 1 && X.is_box()) {
    const auto [lo, hi] = (*X.box)[0];
    json iv = json::array();
    for (auto [l, h] : extract_intervals(inner, lo, hi)) iv.push_back({l, h});
    artifacts.push_back({out + ".intervals.json", json{{"epsilon", eps}, {"intervals", iv}}.dump(2) + "\n"});
    std::cout << "intervals " << iv.dump() << "\n";
  }
  timings["eval"] = since(t0);
  emit("eval", a.result, out + ".manifest.json", artifacts, timings);
  std::cout << "members " << members << " / " << grid.size() << "\nwrote " << out << "\n";
  return kExitOk;
}

struct OracleArgs {
  std::string config;
  std::optional<double> epsilon;
  std::optional<int> x_steps, a_steps, samples;
  std::optional<std::uint64_t> seed;
  bool mc = false;
  std::string out;
};

OracleEstimate run_oracle(const ProblemSpec& spec, const OracleArgs& a, double eps) {
  if (!spec.family) throw ConfigError("family: the oracle needs a parametrized family");
  return feasible_set_oracle(spec, eps, a.x_steps.value_or(spec.oracle.x_steps), a.a_steps.value_or(spec.oracle.a_steps),
                             a.samples.value_or(spec.oracle.samples), a.seed.value_or(spec.seed), a.mc);
}

int cmd_oracle(const OracleArgs& a) {
  auto t0 = Clock::now();
  const ProblemSpec spec = load_problem(a.config);
  const double eps = a.epsilon.value_or(spec.epsilon);
  check_epsilon(eps);
  json timings;
  timings["parse"] = since(t0);
  const OracleEstimate est = run_oracle(spec, a, eps);
  timings["oracle"] = est.seconds;
  std::ostringstream csv;
  csv << std::setprecision(12);
  for (int i = 0; i < spec.space.n(); ++i) csv << "x" << i + 1 << ",";
  csv << "kappa_hat,feasible\n";
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    for (double v : est.grid[i]) csv << v << ",";
    csv << est.kappa_hat[i] << "," << (est.feasible[i] ? 1 : 0) << "\n";
  }
  const std::string out = a.out.empty() ? spec.name + "_oracle.csv" : a.out;
  emit("oracle", a.config, out + ".manifest.json", {{out, csv.str()}}, timings);
  std::cout << "method " << method_name(est.method) << "  feasible " << est.feasible_count() << " / "
            << est.grid.size() << "\nwrote " << out << "\n";
  return kExitOk;
}

struct CompareArgs {
  std::string result;
  OracleArgs oracle;
  bool table = false;
};

int cmd_compare(const CompareArgs& a) {
  auto t0 = Clock::now();
  const json j = read_json_file(a.result);
  const ProblemSpec spec = load_problem(a.oracle.config);
  if (j.value("problem_hash", "") != problem_hash(spec))
    throw ConfigError("problem_hash: result was produced for a different problem than " + a.oracle.config);
  const SolveResult r = result_from_json(j, spec.space);
  if (!r.usable()) throw ConfigError("result: status " + status_name(r.status) + " carries no certificate");
  std::vector<double> eps_list;
  if (a.table)
    eps_list = {0.5, 0.25, 0.125, 0.0625, 0.03125};
  else
    eps_list = {a.oracle.epsilon.value_or(j.value("epsilon", spec.epsilon))};
  for (double e : eps_list) check_epsilon(e);
  json timings;
  timings["parse"] = since(t0);
  const OracleEstimate base = run_oracle(spec, a.oracle, eps_list[0]);
  timings["oracle"] = base.seconds;
  json rows = json::array();
  double compare_seconds = 0;
  for (double e : eps_list) {
    const OracleEstimate est = with_epsilon(base, e);
    const ComparisonReport rep = compare(extract_inner(r, e, spec.X), est);
    compare_seconds += rep.seconds;
    rows.push_back({{"epsilon", e},
                    {"coverage", rep.coverage_ratio},
                    {"violations", rep.violations},
                    {"inner_points", rep.inner_count},
                    {"oracle_points", rep.oracle_count}});
    std::cout << "epsilon " << e << "  coverage " << fmt(rep.coverage_ratio) << "  violations " << rep.violations
              << "\n";
  }
  timings["compare"] = compare_seconds;
  json report;
  if (a.table) {
    report["rows"] = rows;
  } else {
    report = rows[0];
  }
  report["grid"] = {{"points", base.grid.size()}, {"x_steps", base.x_steps}, {"a_steps", base.a_steps},
                    {"samples", base.samples}, {"seed", base.seed}, {"method", method_name(base.method)}};
  report["timings"] = timings;
  report["degree"] = r.degree();
  report["variant"] = variant_name(r.variant);
  const std::string out = a.oracle.out.empty() ? strip_json(a.result) + "_compare.json" : a.oracle.out;
  emit("compare", a.result, out + ".manifest.json", {{out, report.dump(2) + "\n"}}, timings);
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inner approximations of distributionally robust chance-constrained sets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Build and solve the moment relaxation");
  solve_cmd->add_option("config", sa.config, "Problem config (JSON)")->required();
  solve_cmd->add_option("--degree", sa.degree, "Relaxation order d (moments up to degree 2d)");
  solve_cmd->add_option("--variant", sa.variant, "base | stokes | joint | moment_box");
  solve_cmd->add_option("--epsilon", sa.epsilon, "Override the config's epsilon");
  solve_cmd->add_option("--out", sa.out, "Result JSON path");
  solve_cmd->add_option("--dump-conic", sa.dump, "Also write the assembled conic problem");
  solve_cmd->add_flag("--verbose", sa.verbose, "Print solver iterations");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate w_d on a grid");
  eval_cmd->add_option("result", ea.result, "Result JSON")->required();
  eval_cmd->add_option("--grid", ea.grid, "N or lo:hi:N[,lo:hi:N...]");
  eval_cmd->add_option("--epsilon", ea.epsilon, "Threshold (default: the result's epsilon)");
  eval_cmd->add_option("--out", ea.out, "CSV path");

  OracleArgs oa;
  auto add_oracle_flags = [](CLI::App* c, OracleArgs& o) {
    c->add_option("--epsilon", o.epsilon, "Threshold");
    c->add_option("--x-steps", o.x_steps, "Grid points per x coordinate");
    c->add_option("--a-steps", o.a_steps, "Grid points per parameter coordinate");
    c->add_option("--samples", o.samples, "Monte Carlo samples per parameter");
    c->add_option("--seed", o.seed, "Seed (default: the config's seed)");
    c->add_flag("--mc", o.mc, "Force Monte Carlo even when the exact oracle applies");
  };
  auto* oracle_cmd = app.add_subcommand("oracle", "Estimate the worst-case violation probability on a grid");
  oracle_cmd->add_option("config", oa.config, "Problem config (JSON)")->required();
  add_oracle_flags(oracle_cmd, oa);
  oracle_cmd->add_option("--out", oa.out, "CSV path");

  CompareArgs ca;
  auto* compare_cmd = app.add_subcommand("compare", "Coverage of the inner set against the oracle");
  compare_cmd->add_option("result", ca.result, "Result JSON")->required();
  compare_cmd->add_option("--config", ca.oracle.config, "Problem config the result was solved from")->required();
  add_oracle_flags(compare_cmd, ca.oracle);
  compare_cmd->add_flag("--table", ca.table, "Sweep epsilon over 0.5, 0.25, 0.125, 0.0625, 0.03125");
  compare_cmd->add_option("--out", ca.oracle.out, "Report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*solve_cmd) return cmd_solve(sa);
    if (*eval_cmd) return cmd_eval(ea);
    if (*oracle_cmd) return cmd_oracle(oa);
    if (*compare_cmd) return cmd_compare(ca);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
