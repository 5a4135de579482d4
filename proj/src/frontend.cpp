#include "impverif/frontend.hpp"

namespace impverif {

Frontend run_frontend(const std::string& text, bool insert_alias_annotations) {
  Frontend f;
  f.surface = parse(text);
  SimpleTypeTable st = infer_simple(f.surface);
  f.core = desugar(f.surface, st);
  if (insert_alias_annotations) f.core = insert_aliases(f.core);
  f.types = infer_simple(f.core);
  return f;
}

}  // namespace impverif
