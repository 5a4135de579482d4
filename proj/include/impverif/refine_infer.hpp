// Refinement inference: the Horn-clause skeleton recorded by the ownership
// walk, instantiated with a verified ownership solution, printed as an
// SMT-LIB2 HORN script and handed to a CHC solver.
#pragma once

#include "impverif/horn.hpp"
#include "impverif/own_infer.hpp"
#include "impverif/solver_io.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace impverif {

/// Substitutes `own` into every clause, conjoins the parameter invariants of
/// the clause's function, folds constants and drops clauses whose constraint
/// became false.
CHCSystem gen_chc(const TemplateTable& t, const OwnSolution& own,
                  const std::map<std::string, Formula>& invariants = {});

/// Deterministic: declarations sorted by name, clauses in generation order.
/// Each declaration carries its parameter names in a trailing comment.
std::string emit_smtlib_horn(const CHCSystem& s);

/// Structural problems: undeclared predicates, arity mismatches, non-integer
/// coefficients, element predicates without a well-formedness clause.
std::vector<std::string> check_chc(const CHCSystem& s);

struct ChcResult {
  enum class Kind { Sat, Unsat, Unknown, Error };
  Kind kind = Kind::Unknown;
  std::string model_text;
  std::string diagnostic;
};

const char* chc_kind_name(ChcResult::Kind k);

ChcResult solve_chc(const std::string& script, const SolverConfig& cfg);

struct ChcInterp {
  std::vector<std::string> params;
  Formula body;
};
using ChcModel = std::map<std::string, ChcInterp>;

/// Reads `define-fun P (...) Bool body` definitions. Definitions using
/// quantifiers are left out and their names stored in `quantified`.
/// Returns nullopt when the text cannot be read.
std::optional<ChcModel> read_chc_model(const std::string& text, std::set<std::string>* quantified = nullptr);

struct ChcAudit {
  std::vector<size_t> invalid;  // clauses not valid under the model
  std::vector<size_t> skipped;  // clauses mentioning a predicate the model leaves out
};

/// Substitutes the model into every clause and checks each with the SMT backend.
ChcAudit audit_chc_model(const CHCSystem& s, const ChcModel& model, const SolverConfig& cfg);

/// The interpretation instantiated at the arguments of `a`.
Formula apply_interp(const ChcInterp& in, const PredApp& a);

/// Linear integer terms and formulas in solver syntax (let, ite, and/or/not/=>,
/// comparisons, +, -, *); nullopt for anything else.
std::optional<Formula> sexp_formula(const Sexp& e);
std::optional<Term> sexp_term(const Sexp& e);

}  // namespace impverif
