// parse -> simple types -> desugar -> alias insertion.
#pragma once

#include "impverif/simple_types.hpp"
#include "impverif/syntax.hpp"

namespace impverif {

struct Frontend {
  Program surface;
  Program core;
  /// Simple types of the core program, including fresh variables.
  SimpleTypeTable types;
};

/// Throws ParseError, TypeError or DesugarError.
Frontend run_frontend(const std::string& text, bool insert_alias_annotations = true);

}  // namespace impverif
