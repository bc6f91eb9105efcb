#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "drcc/certificate.hpp"
#include "drcc/oracle.hpp"
#include "drcc/problem.hpp"

namespace drcc {

using json = nlohmann::json;

inline constexpr const char* kProblemSchema = "drcc-problem/1";
inline constexpr const char* kResultSchema = "drcc-result/1";
inline constexpr const char* kToolVersion = "0.1.0";

// Malformed or inconsistent configuration; the message starts with the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

json polynomial_to_json(const Polynomial& p);
Polynomial polynomial_from_json(const json& j, const VariableSpace& space, const std::string& field);

json set_to_json(const SemialgebraicSet& s);
SemialgebraicSet set_from_json(const json& j, const VariableSpace& space, Block block, const std::string& field);

ProblemSpec problem_from_json(const json& j);
json problem_to_json(const ProblemSpec& spec);
ProblemSpec load_problem(const std::string& path);

// FNV-1a 64-bit over the canonical dump of the problem, as 16 hex digits.
std::string problem_hash(const ProblemSpec& spec);
std::string hash_bytes(const std::string& bytes);

json result_to_json(const SolveResult& r, const ProblemSpec& spec);
// Rebuilds the certificate parts of a result (status, rho, w, h, gap, degree).
SolveResult result_from_json(const json& j, const VariableSpace& space);

json conic_to_json(const ConicProblem& P, const MomentRelaxation& R);

json read_json_file(const std::string& path);
// Writes through a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace drcc
