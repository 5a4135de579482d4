// Parsing, desugaring, alias insertion and pretty-printing.
#pragma once

#include "impverif/ast.hpp"

#include <string>

namespace impverif {

Program parse(const std::string& text);
/// Parses a standalone formula (as accepted inside `assert(...)`).
Formula parse_formula(const std::string& text);

std::string pretty(const Program& p);
std::string pretty(const ExprPtr& e, int indent = 0);

struct SimpleTypeTable;

struct DesugarError : std::runtime_error {
  DesugarError(const std::string& msg, SourcePos p)
      : std::runtime_error(std::to_string(p.line) + ":" + std::to_string(p.col) + ": " + msg), pos(p) {}
  SourcePos pos;
};

/// Rewrites surface sugar into core forms. Fresh variables are named `$k`;
/// their simple types are recorded in `st`.
Program desugar(const Program& p, SimpleTypeTable& st);

/// Wraps every `let x = y ++ z in e` as
/// `let x = y ++ z in let w = { e } in autoalias(x = y + z); w`.
/// Nodes already carrying the auto marker are left alone.
Program insert_aliases(const Program& p);

}  // namespace impverif
