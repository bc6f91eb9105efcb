#include "drcc/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace drcc {

namespace {

template <class T>
T get_field(const json& j, const std::string& key, const std::string& field) {
  const std::string name = field.empty() ? key : field + "." + key;
  if (!j.contains(key) || j.at(key).is_null()) throw ConfigError(name + ": required");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& field) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get_field<T>(j, key, field);
}

Block parse_block(const std::string& s, const std::string& field) {
  if (s == "x") return Block::x;
  if (s == "omega") return Block::omega;
  if (s == "a" || s == "param") return Block::param;
  throw ConfigError(field + ": unknown block '" + s + "'");
}

std::vector<Interval> parse_box(const json& j, int dim, const std::string& field) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ConfigError(field + ": expected " + std::to_string(dim) + " [lo, hi] pairs");
  std::vector<Interval> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw ConfigError(field + ": each bound must be [lo, hi]");
    const double lo = e[0].get<double>(), hi = e[1].get<double>();
    if (!(lo <= hi)) throw ConfigError(field + ": lower bound exceeds upper bound");
    out.push_back({lo, hi});
  }
  return out;
}

json box_to_json(const std::vector<Interval>& b) {
  json j = json::array();
  for (auto [lo, hi] : b) j.push_back({lo, hi});
  return j;
}

DistributionFamily family_from_json(const json& j, const VariableSpace& space, const std::string& field) {
  const auto kind = get_field<std::string>(j, "family", field);
  auto param_set = [&]() {
    if (!j.contains("A")) throw ConfigError(field + ".A: missing");
    return set_from_json(j.at("A"), space, Block::param, field + ".A");
  };
  try {
    if (kind == "gaussian1d") {
      std::optional<double> mean;
      if (j.contains("mean") && !j.at("mean").is_null()) mean = j.at("mean").get<double>();
      return DistributionFamily::gaussian1d(space, param_set(), mean);
    }
    if (kind == "gaussian") return DistributionFamily::gaussian(space, param_set());
    if (kind == "exponential") return DistributionFamily::exponential(space, param_set());
    if (kind == "poisson") return DistributionFamily::poisson(space, param_set());
    if (kind == "binomial") return DistributionFamily::binomial(space, get_field<int>(j, "N", field), param_set());
    if (kind == "finite") {
      std::vector<FiniteComponent> comps;
      const json& cs = j.at("components");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string cf = field + ".components[" + std::to_string(i) + "]";
        const auto a = get_field<std::vector<double>>(cs[i], "a", cf);
        VariableSpace sub(space.n(), space.p(), static_cast<int>(a.size()));
        json inner = cs[i].at("family");
        if (!inner.contains("A")) {
          std::vector<Interval> pt;
          for (double v : a) pt.push_back({v, v});
          inner["A"] = {{"box", box_to_json(pt)}};
        }
        auto fam = std::make_shared<DistributionFamily>(family_from_json(inner, sub, cf + ".family"));
        comps.push_back({std::move(fam), a});
      }
      return DistributionFamily::finite(space, std::move(comps));
    }
    if (kind == "moment_table") {
      std::map<std::vector<int>, Polynomial> table;
      const auto betas = get_field<std::vector<std::vector<int>>>(j, "betas", field);
      const json& polys = j.at("polys");
      if (polys.size() != betas.size()) throw ConfigError(field + ".polys: one polynomial per beta");
      for (std::size_t i = 0; i < betas.size(); ++i)
        table[betas[i]] = polynomial_from_json(polys[i], space, field + ".polys[" + std::to_string(i) + "]");
      return DistributionFamily::moment_table(space, param_set(), std::move(table));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(field + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(field + ": " + e.what());
  }
  throw ConfigError(field + ".family: unknown family '" + kind + "'");
}

json family_to_json(const DistributionFamily& f) {
  json j;
  j["family"] = family_name(f.kind());
  switch (f.kind()) {
    case FamilyKind::FiniteList: {
      json cs = json::array();
      for (const auto& c : f.components()) cs.push_back({{"a", c.a}, {"family", family_to_json(*c.family)}});
      j["components"] = cs;
      return j;
    }
    case FamilyKind::MomentTable: {
      json betas = json::array(), polys = json::array();
      for (const auto& [b, p] : f.table()) {
        betas.push_back(b);
        polys.push_back(polynomial_to_json(p));
      }
      j["betas"] = betas;
      j["polys"] = polys;
      break;
    }
    case FamilyKind::Binomial: j["N"] = f.binomial_n(); break;
    case FamilyKind::GaussianUnivariate:
      if (f.fixed_mean()) j["mean"] = *f.fixed_mean();
      break;
    default: break;
  }
  j["A"] = set_to_json(f.param_set());
  return j;
}

}  // namespace

json polynomial_to_json(const Polynomial& p) {
  json j = json::array();
  for (const auto& [m, c] : p.terms()) j.push_back({{"exps", m.exps}, {"coef", c}});
  return j;
}

Polynomial polynomial_from_json(const json& j, const VariableSpace& space, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": polynomial must be a list of {exps, coef} terms");
  Polynomial p(space);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string tf = field + "[" + std::to_string(i) + "]";
    auto exps = get_field<std::vector<int>>(j[i], "exps", tf);
    const double c = get_field<double>(j[i], "coef", tf);
    if (static_cast<int>(exps.size()) != space.dim())
      throw ConfigError(tf + ".exps: expected " + std::to_string(space.dim()) + " exponents");
    for (int e : exps)
      if (e < 0) throw ConfigError(tf + ".exps: negative exponent");
    p.add_term(Monomial(std::move(exps)), c);
  }
  return p;
}

json set_to_json(const SemialgebraicSet& s) {
  json j;
  j["block"] = block_name(s.block);
  if (s.is_box()) {
    j["box"] = box_to_json(*s.box);
    return j;
  }
  json ineqs = json::array(), eqs = json::array();
  for (const auto& g : s.inequalities) ineqs.push_back(polynomial_to_json(g));
  for (const auto& h : s.equalities) eqs.push_back(polynomial_to_json(h));
  j["ineqs"] = ineqs;
  j["eqs"] = eqs;
  if (s.ball_radius_sq) j["ball"] = *s.ball_radius_sq;
  return j;
}

SemialgebraicSet set_from_json(const json& j, const VariableSpace& space, Block block, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field + ": expected an object");
  if (j.contains("block") && parse_block(j.at("block").get<std::string>(), field + ".block") != block)
    throw ConfigError(field + ".block: does not match the expected block " + block_name(block));
  if (j.contains("box")) return make_box(space, block, parse_box(j.at("box"), space.size(block), field + ".box"));
  SemialgebraicSet s = make_free(space, block);
  if (j.contains("ineqs"))
    for (std::size_t i = 0; i < j.at("ineqs").size(); ++i)
      s.inequalities.push_back(
          polynomial_from_json(j.at("ineqs")[i], space, field + ".ineqs[" + std::to_string(i) + "]"));
  if (j.contains("eqs"))
    for (std::size_t i = 0; i < j.at("eqs").size(); ++i)
      s.equalities.push_back(polynomial_from_json(j.at("eqs")[i], space, field + ".eqs[" + std::to_string(i) + "]"));
  if (j.contains("ball") && !j.at("ball").is_null()) {
    const double M = j.at("ball").get<double>();
    if (!(M > 0)) throw ConfigError(field + ".ball: radius must be positive");
    s.ball_radius_sq = M;
  }
  return s;
}

ProblemSpec problem_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("problem: expected a JSON object");
  if (j.contains("schema") && j.at("schema") != kProblemSchema)
    throw ConfigError("schema: unsupported '" + j.at("schema").dump() + "'");
  ProblemSpec spec;
  spec.name = get_or<std::string>(j, "name", "problem", "");
  const json& dims = j.contains("dims") ? j.at("dims") : throw ConfigError("dims: missing");
  const int n = get_field<int>(dims, "n", "dims"), p = get_field<int>(dims, "p", "dims"),
            t = get_or<int>(dims, "t", 0, "dims");
  if (n < 1 || p < 1 || t < 0) throw ConfigError("dims: n, p must be positive and t nonnegative");
  spec.space = VariableSpace(n, p, t);

  if (!j.contains("X")) throw ConfigError("X: missing");
  spec.X = set_from_json(j.at("X"), spec.space, Block::x, "X");
  if (j.at("X").contains("lebesgue_moments")) {
    for (const auto& e : j.at("X").at("lebesgue_moments"))
      spec.lebesgue_table.push_back(
          {get_field<std::vector<int>>(e, "exps", "X.lebesgue_moments"), get_field<double>(e, "value", "X.lebesgue_moments")});
  }

  try {
    spec.variant = parse_variant(get_or<std::string>(j, "variant", "base", ""));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("family") && !j.at("family").is_null())
    spec.family = family_from_json(j.at("family"), spec.space, "family");
  if (j.contains("moment_box") && !j.at("moment_box").is_null()) {
    const json& mb = j.at("moment_box");
    MomentBoxSpec m;
    m.mean_bounds = parse_box(mb.at("mean"), p, "moment_box.mean");
    const auto delta = get_field<std::vector<double>>(mb, "delta", "moment_box");
    if (delta.size() != 2) throw ConfigError("moment_box.delta: expected [lo, hi]");
    m.delta_lo = delta[0];
    m.delta_hi = delta[1];
    spec.moment_box = m;
  }

  if (j.contains("Omega") && !j.at("Omega").is_null())
    spec.Omega = set_from_json(j.at("Omega"), spec.space, Block::omega, "Omega");
  else if (spec.family)
    spec.Omega = spec.family->default_omega();
  else
    spec.Omega = make_free(spec.space, Block::omega);

  if (j.contains("f_list")) {
    for (std::size_t i = 0; i < j.at("f_list").size(); ++i)
      spec.f_list.push_back(polynomial_from_json(j.at("f_list")[i], spec.space, "f_list[" + std::to_string(i) + "]"));
  } else if (j.contains("f")) {
    spec.f_list.push_back(polynomial_from_json(j.at("f"), spec.space, "f"));
  } else {
    throw ConfigError("f: missing");
  }

  spec.epsilon = get_field<double>(j, "epsilon", "");
  spec.degree = get_or<int>(j, "degree", spec.degree, "");
  spec.seed = get_or<std::uint64_t>(j, "seed", spec.seed, "");
  spec.noise_scale = get_or<double>(j, "noise_scale", spec.noise_scale, "");
  if (j.contains("stokes")) {
    const json& s = j.at("stokes");
    if (s.contains("beta_max") && !s.at("beta_max").is_null()) spec.stokes.beta_max = s.at("beta_max").get<int>();
    spec.stokes.gamma_max = get_or<int>(s, "gamma_max", spec.stokes.gamma_max, "stokes");
  }
  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    spec.oracle.x_steps = get_or<int>(o, "x_steps", spec.oracle.x_steps, "oracle");
    spec.oracle.a_steps = get_or<int>(o, "a_steps", spec.oracle.a_steps, "oracle");
    spec.oracle.samples = get_or<int>(o, "samples", spec.oracle.samples, "oracle");
  }
  try {
    validate(spec);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

json problem_to_json(const ProblemSpec& spec) {
  json j;
  j["schema"] = kProblemSchema;
  j["name"] = spec.name;
  j["dims"] = {{"n", spec.space.n()}, {"p", spec.space.p()}, {"t", spec.space.t()}};
  j["X"] = set_to_json(spec.X);
  if (!spec.lebesgue_table.empty()) {
    json lm = json::array();
    for (const auto& e : spec.lebesgue_table) lm.push_back({{"exps", e.alpha}, {"value", e.value}});
    j["X"]["lebesgue_moments"] = lm;
  }
  j["Omega"] = set_to_json(spec.Omega);
  if (spec.family) j["family"] = family_to_json(*spec.family);
  if (spec.moment_box)
    j["moment_box"] = {{"mean", box_to_json(spec.moment_box->mean_bounds)},
                       {"delta", {spec.moment_box->delta_lo, spec.moment_box->delta_hi}}};
  json fl = json::array();
  for (const auto& f : spec.f_list) fl.push_back(polynomial_to_json(f));
  j["f_list"] = fl;
  j["epsilon"] = spec.epsilon;
  j["degree"] = spec.degree;
  j["variant"] = variant_name(spec.variant);
  j["stokes"] = {{"gamma_max", spec.stokes.gamma_max}};
  if (spec.stokes.beta_max) j["stokes"]["beta_max"] = *spec.stokes.beta_max;
  j["seed"] = spec.seed;
  j["noise_scale"] = spec.noise_scale;
  j["oracle"] = {{"x_steps", spec.oracle.x_steps}, {"a_steps", spec.oracle.a_steps}, {"samples", spec.oracle.samples}};
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ProblemSpec load_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

std::string hash_bytes(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string problem_hash(const ProblemSpec& spec) {
  // Only the fields that define w's meaning; solve and compare may override the rest.
  json j = problem_to_json(spec);
  for (const char* k : {"name", "epsilon", "degree", "variant", "stokes", "seed", "oracle"}) j.erase(k);
  return hash_bytes(j.dump());
}

json result_to_json(const SolveResult& r, const ProblemSpec& spec) {
  json j;
  j["schema"] = kResultSchema;
  j["tool_version"] = kToolVersion;
  j["problem"] = spec.name;
  j["problem_hash"] = problem_hash(spec);
  j["dims"] = {{"n", spec.space.n()}, {"p", spec.space.p()}, {"t", spec.space.t()}};
  j["status"] = status_name(r.status);
  j["rho_d"] = r.rho_d;
  j["order"] = r.order;
  j["degree"] = r.degree();
  j["variant"] = variant_name(r.variant);
  j["epsilon"] = spec.epsilon;
  j["X"] = set_to_json(spec.X);
  j["w"] = polynomial_to_json(r.dual_w);
  j["h"] = polynomial_to_json(r.dual_h);
  j["iterations"] = r.iterations;
  j["gap"] = r.gap;
  j["rel_gap"] = r.rel_gap;
  j["primal_infeasibility"] = r.primal_infeasibility;
  j["dual_infeasibility"] = r.dual_infeasibility;
  j["integral_w"] = r.integral_w;
  j["seconds"] = r.seconds;
  j["resolved"] = r.resolved;
  return j;
}

SolveResult result_from_json(const json& j, const VariableSpace& space) {
  if (j.value("schema", "") != kResultSchema) throw ConfigError("schema: not a result file");
  SolveResult r;
  const std::string st = get_field<std::string>(j, "status", "result");
  bool known = false;
  for (auto s : {SolverStatus::optimal, SolverStatus::near_optimal, SolverStatus::infeasible, SolverStatus::unbounded,
                 SolverStatus::numerical_failure})
    if (status_name(s) == st) {
      r.status = s;
      known = true;
    }
  if (!known) throw ConfigError("result.status: unknown '" + st + "'");
  r.rho_d = get_field<double>(j, "rho_d", "result");
  r.order = get_field<int>(j, "order", "result");
  r.variant = parse_variant(get_field<std::string>(j, "variant", "result"));
  r.dual_w = polynomial_from_json(j.at("w"), space, "result.w");
  r.dual_h = polynomial_from_json(j.at("h"), space, "result.h");
  r.iterations = get_or<int>(j, "iterations", 0, "result");
  r.gap = get_or<double>(j, "gap", 0.0, "result");
  r.rel_gap = get_or<double>(j, "rel_gap", 0.0, "result");
  r.primal_infeasibility = get_or<double>(j, "primal_infeasibility", 0.0, "result");
  r.dual_infeasibility = get_or<double>(j, "dual_infeasibility", 0.0, "result");
  r.integral_w = get_or<double>(j, "integral_w", 0.0, "result");
  r.seconds = get_or<double>(j, "seconds", 0.0, "result");
  r.resolved = get_or<bool>(j, "resolved", false, "result");
  return r;
}

json conic_to_json(const ConicProblem& P, const MomentRelaxation& R) {
  json j;
  j["num_vars"] = P.num_vars;
  j["objective"] = P.objective;
  json blocks = json::array();
  for (std::size_t b = 0; b < P.blocks.size(); ++b) {
    json e = json::array();
    for (const auto& s : P.blocks[b].entries) e.push_back({s.var, s.row, s.col, s.coef});
    blocks.push_back({{"name", R.psd_blocks[b].name}, {"dim", P.blocks[b].dim}, {"entries", e}});
  }
  j["blocks"] = blocks;
  j["num_rows"] = P.num_rows;
  json eq = json::array();
  for (const auto& t : P.equalities) eq.push_back({t.row, t.col, t.value});
  j["equalities"] = eq;
  j["rhs"] = P.rhs;
  return j;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path + ": cannot write");
    out << content;
    if (!out) throw Error(path + ": write failed");
  }
  fs::rename(tmp, target);
}

}  // namespace drcc
