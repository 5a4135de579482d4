// A small CHC solver for the systems this verifier emits: Houdini over
// qualifier atoms, with the predicates' well-formedness regions exempt.
// Used by the impverif-chc tool, which reads SMT-LIB2 HORN files like any
// external CHC solver.
#pragma once

#include "impverif/horn.hpp"
#include "impverif/refine_infer.hpp"
#include "impverif/solver_io.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace impverif {

struct HornParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads `declare-fun` (parameter names from a trailing `; name ...` comment
/// when present, else `$a0 ...`; the last parameter is the value, `$i` marks
/// an element index) and `assert` commands of the form
/// `(forall (...) (=> body head))` or `(=> body head)`. Other commands are
/// ignored.
CHCSystem parse_smtlib_horn(const std::string& text);

/// Greatest inductive conjunction of candidate atoms per predicate (ν against
/// 0, 1 and the scope variables, also guarded by $i >= 1 / $i <= -1 for
/// element predicates, and against pairwise sums of scope variables for scalar
/// predicates; scope variables against 0, 1 and each other). A clause without
/// body predicates whose head arguments are distinct variables covering its
/// constraint is absorbed: its constraint is added to the predicate as a
/// region where the conjunction is not required. Returns the model when every
/// goal clause holds under it.
std::optional<ChcModel> solve_chc_qualifiers(const CHCSystem& s, const SolverConfig& cfg, int max_rounds = 64);

/// `(define-fun P ((x Int) ...) Bool body)` per predicate, wrapped in one list.
std::string print_chc_model(const CHCSystem& s, const ChcModel& m);

}  // namespace impverif
