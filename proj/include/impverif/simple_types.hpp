// Unification-based simple type inference (int / int ref^k).
#pragma once

#include "impverif/ast.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace impverif {

struct TypeError : std::runtime_error {
  TypeError(const std::string& msg, SourcePos p)
      : std::runtime_error(std::to_string(p.line) + ":" + std::to_string(p.col) + ": " + msg), pos(p) {}
  SourcePos pos;
};

/// Binder types are keyed by (function, variable name); all binders of one
/// name inside one function share a type. The main expression uses scope "".
struct SimpleTypeTable {
  struct Sig {
    std::vector<SimpleType> params;
    SimpleType ret;
  };
  std::map<std::string, std::map<std::string, SimpleType>> vars;
  std::map<std::string, Sig> funs;

  /// Throws std::out_of_range when the variable was never typed.
  SimpleType var(const std::string& fn, const std::string& x) const;
  bool has(const std::string& fn, const std::string& x) const;
  void set(const std::string& fn, const std::string& x, SimpleType t) { vars[fn][x] = t; }

  std::string dump() const;
};

/// Also checks scoping: every used variable is bound, every called function
/// exists with the right arity.
SimpleTypeTable infer_simple(const Program& p);

}  // namespace impverif
