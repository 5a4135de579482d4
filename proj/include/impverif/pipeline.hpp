// parse -> simple types -> desugar -> aliases -> ownership -> refinement.
#pragma once

#include "impverif/own_infer.hpp"
#include "impverif/solver_io.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace impverif {

struct VerifyOptions {
  SolveParams own;
  SolverConfig solver;
  std::string emit_own_constraints;  // path, empty: none
  std::string emit_chc;              // path, empty: none
  bool no_solvers = false;           // frontend, generation and emission only
};

struct VerifyReport {
  enum class Verdict { Safe, Unknown, FrontendError };
  enum class Phase { None, SimpleTypes, Ownership, Refinement };

  Verdict verdict = Verdict::Unknown;
  Phase phase = Phase::None;
  std::string reason;

  std::vector<std::pair<std::string, double>> timings;  // phase -> seconds, in order
  size_t templates = 0, own_constraints = 0, own_unknowns = 0;
  int own_rounds = 0;
  size_t chc_predicates = 0, chc_clauses = 0;
  std::vector<std::string> artifacts;

  std::map<std::string, std::string> invariants;  // function -> parameter invariant
  std::vector<std::string> ownership;             // solved templates, "fn.var@site: [lo, hi] -> o"
  std::string chc_command, chc_result;
  bool audited = false;
  size_t audit_invalid = 0, audit_skipped = 0;

  nlohmann::json to_json() const;
  std::string summary() const;
};

const char* verdict_name(VerifyReport::Verdict v);
const char* phase_name(VerifyReport::Phase p);

VerifyReport verify_source(const std::string& text, const VerifyOptions& opts);

}  // namespace impverif
