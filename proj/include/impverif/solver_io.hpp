// SMT-LIB2 printing, solver subprocesses and result parsing.
//
// All solver interaction is batch and file based: a script is written to the
// scratch directory and passed as the last argument of the configured command.
// The command "builtin" selects the in-tree mini-solver for plain queries.
#pragma once

#include "impverif/logic.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace impverif {

struct SolverConfig {
  std::string smt_cmd = "z3";
  /// Empty: "hoice" when on PATH, else impverif-chc next to the running
  /// executable or on PATH, else "z3 fp.spacer.global=true".
  std::string chc_cmd;
  double timeout_secs = 600;
  std::string scratch_dir;  // empty: a per-process directory under the system temp dir
  bool keep_scratch = false;
  std::string job = "impverif";

  /// Defaults overridden by IMPVERIF_SMT_CMD / IMPVERIF_CHC_CMD.
  static SolverConfig from_env();
  std::string effective_chc_cmd() const;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverVerdict {
  enum class Kind { Sat, Unsat, Unknown, Error };
  Kind kind = Kind::Unknown;
  std::string model_text;
  std::string diagnostic;
};

const char* verdict_name(SolverVerdict::Kind k);

enum class Sort { Int, Real };
using SortMap = std::map<std::string, Sort>;
using Model = std::map<std::string, Rational>;

// ---------------------------------------------------------------- printing

std::string smt_symbol(const std::string& name);
std::string smt_number(const Rational& r);
/// Variables missing from `sorts` are treated as Int. Int variables inside a
/// Real atom are wrapped in to_real.
std::string smt_term(const Term& t, const SortMap& sorts, bool as_real = false);
std::string smt_formula(const Formula& f, const SortMap& sorts);
/// `(declare-fun x () Int)` lines for the given symbols, in name order.
std::string smt_declarations(const SortMap& sorts);

// ---------------------------------------------------------------- processes

struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
  std::string out;
  std::string err;
};

/// Runs `sh -c "exec CMD FILE"` with a wall-clock limit; the whole process
/// group is killed on timeout.
ProcessResult run_command(const std::string& cmd, const std::string& file, double timeout_secs);

/// Writes `script` to a fresh scratch file `<job>-<n>.smt2` and returns its path.
std::string write_scratch(const SolverConfig& cfg, const std::string& script);
void drop_scratch(const SolverConfig& cfg, const std::string& path);

// ---------------------------------------------------------------- parsing

/// Maps any solver output to exactly one verdict by its first non-empty line.
SolverVerdict parse_verdict(const ProcessResult& r);

struct Sexp {
  std::string atom;
  std::vector<Sexp> list;
  bool is_list = false;
};

/// Top-level S-expressions of `text`; stray closing parentheses are skipped.
std::vector<Sexp> parse_sexps(const std::string& text);

/// Parses `(model (define-fun x () Int 3) ...)` or the bare-list form.
/// Non-numeric definitions are skipped.
Model parse_model(const std::string& text);

// ---------------------------------------------------------------- queries

struct SatResult {
  SolverVerdict::Kind kind = SolverVerdict::Kind::Unknown;
  Model model;
  std::string diagnostic;
};

/// Quantifier-free satisfiability over mixed Int/Real symbols.
SatResult check_sat_qf(const Formula& f, const SortMap& sorts, const SolverConfig& cfg);

/// Several independent queries answered by one solver process (push/pop).
std::vector<SatResult> check_sat_batch(const std::vector<Formula>& fs, const SortMap& sorts,
                                       const SolverConfig& cfg);

struct ValidityResult {
  enum class Kind { Valid, Invalid, Unknown };
  Kind kind = Kind::Unknown;
  Model counterexample;
  std::string diagnostic;
};

ValidityResult check_valid(const ValidityObligation& ob, const SolverConfig& cfg);

/// Runs a `(set-logic HORN)` script with the CHC command.
SolverVerdict run_horn(const std::string& script, const SolverConfig& cfg);

/// In-tree decision procedure for ground formulas and formulas with a single
/// variable (all atoms linear). Anything else yields Unknown.
SatResult mini_solve(const Formula& f, const SortMap& sorts);

}  // namespace impverif
