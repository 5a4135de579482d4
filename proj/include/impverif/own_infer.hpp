// Ownership inference: interval templates for every reference at every
// ownership-relevant program point, exists-forall constraints over their
// unknown coefficients, and a sampling/verification (CEGIS) solver.
//
// The template walk also records the Horn-clause skeleton used by the
// refinement phase, so both phases see the same program points.
#pragma once

#include "impverif/ast.hpp"
#include "impverif/horn.hpp"
#include "impverif/logic.hpp"
#include "impverif/simple_types.hpp"
#include "impverif/solver_io.hpp"

#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace impverif {

struct Unsupported : std::runtime_error {
  explicit Unsupported(const std::string& what) : std::runtime_error("unsupported: " + what) {}
};

/// One interval entry `[lo, hi] -> own` whose bounds are affine in `vars`
/// with unknown integer coefficients.
struct OwnTemplate {
  int id = 0;
  std::string fn;  // "" for main
  std::string var;
  std::string site;
  std::vector<std::string> vars;
  std::vector<std::string> lo_coeffs, hi_coeffs;  // constant first, then one per var
  std::string own;
  Term lo, hi;

  std::string to_string() const;
};

/// A universal computed from others; `q = trunc(num / div)`.
struct Derived {
  Term num;
  BigInt div;
};

struct OwnConstraint {
  std::string fn;
  char schema = 'a';  // a flow, b assign, c deref, d split, e alloc, f call, g merge
  std::string site;
  std::vector<std::string> universals;  // sorted
  Formula guard;
  Formula body;
  /// Stronger body tried first (exact ownership return at function exit).
  std::optional<Formula> preferred;
  std::map<std::string, Derived> derived;

  std::string to_string() const;
};

struct CallSite {
  std::string caller, callee;
  Formula guard;
  std::map<std::string, Term> actuals;  // int formal -> caller term
};

struct FunTemplates {
  std::vector<std::string> int_formals;
  std::map<std::string, int> pre, post;  // reference formal -> template id
};

struct TemplateTable {
  std::vector<OwnTemplate> templates;
  std::map<std::string, FunTemplates> funs;
  std::vector<OwnConstraint> constraints;
  std::vector<CallSite> calls;
  SortMap unknowns;  // coefficients Int, ownerships Real
  CHCSystem skeleton;  // clauses still mention ownership unknowns

  /// Templates of one function / pointer, in creation order.
  std::vector<const OwnTemplate*> of(const std::string& fn, const std::string& var) const;
};

/// Walks every function and main. Throws Unsupported for nested pointers,
/// reference-typed results and pointers passed twice to one call.
TemplateTable gen_templates(const Program& p, const SimpleTypeTable& st);

/// Conjunction of branch conditions (with definitions inlined) enclosing the
/// first occurrence of a `marker` assert: `assert(marker_var = marker_var)`.
/// Exposed for tests: returns the path condition at the first Assert whose
/// formula mentions `marker_var`.
std::optional<Formula> collect_path_condition(const Program& p, const SimpleTypeTable& st, const std::string& fn,
                                              const std::string& marker_var);

/// Scalar invariants of integer formals, checked inductive over all call
/// sites (Houdini over x >= 0, x >= 1, x >= y).
std::map<std::string, Formula> infer_param_invariants(const TemplateTable& t, const SolverConfig& cfg);

/// The constraints of `t`, with each guard strengthened by the enclosing
/// function's parameter invariants.
std::vector<OwnConstraint> gen_own_constraints(const TemplateTable& t,
                                               const std::map<std::string, Formula>& invariants = {});

struct OwnSolution {
  std::map<std::string, Rational> values;

  Term eval(const Term& t) const;
  Formula eval(const Formula& f) const;
};

struct SolveParams {
  int samples_per_round = 8;
  int max_rounds = 40;
  uint64_t seed = 0;
  int sample_lo = -8, sample_hi = 64;
  int coeff_bound = 4;  // |c| bound on variable coefficients; 0 = none
  bool prefer = true;   // first attempt uses the preferred bodies
};

struct OwnResult {
  enum class Kind { Solved, Unknown };
  Kind kind = Kind::Unknown;
  OwnSolution solution;
  std::string reason;
  int rounds = 0;
  bool used_preferred = false;
};

/// `unknowns` lists every existential symbol with its sort; Real symbols are
/// ownerships and range over [0,1]. Throws SolverError on solver failure.
OwnResult solve_exists_forall(const std::vector<OwnConstraint>& cs, const SortMap& unknowns, const SolveParams& params,
                              const SolverConfig& cfg);

/// Indices of constraints not valid under `sol`, each checked by its own
/// solver query.
std::vector<size_t> verify_own_solution(const std::vector<OwnConstraint>& cs, const OwnSolution& sol,
                                        const SolverConfig& cfg);

/// Uniformly sampled point of the universals satisfying the guard, or nullopt
/// after `attempts` rejections.
std::optional<Valuation> sample_point(const OwnConstraint& c, std::mt19937_64& rng, int lo, int hi, int attempts);

/// SMT-LIB2 text: unknown declarations and one quantified assert per constraint.
std::string emit_own_smtlib(const std::vector<OwnConstraint>& cs, const SortMap& unknowns);

}  // namespace impverif
