// Constrained Horn clause systems over integer predicates.
#pragma once

#include "impverif/logic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace impverif {

struct PredVar {
  std::string name;
  std::vector<std::string> params;  // scope variables, then "$i" for element predicates, then "$nu"
  bool indexed = false;
  std::string role;  // "elem", "pre", "pre-ptr", "post-ptr", "ret", "join-value"
};

struct PredApp {
  std::string pred;
  std::vector<Term> args;

  std::set<std::string> vars() const;
  PredApp substitute(const std::map<std::string, Term>& sub) const;
  std::string to_string() const;
  friend bool operator==(const PredApp& a, const PredApp& b) { return a.pred == b.pred && a.args == b.args; }
};

struct HornClause {
  std::string kind;  // e.g. "write", "frame", "shift", "wf", "goal"
  std::string fn;
  std::vector<PredApp> body;
  Formula constraint;
  std::optional<PredApp> head;  // nullopt: false

  /// Free variables of constraint and arguments, sorted.
  std::vector<std::string> universals() const;
  std::string to_string() const;
};

struct CHCSystem {
  std::vector<PredVar> preds;
  std::vector<HornClause> clauses;

  const PredVar* find(const std::string& name) const;
};

}  // namespace impverif
