#include "impverif/horn.hpp"

namespace impverif {

std::set<std::string> PredApp::vars() const {
  std::set<std::string> out;
  for (const auto& a : args)
    for (const auto& v : a.vars()) out.insert(v);
  return out;
}

PredApp PredApp::substitute(const std::map<std::string, Term>& sub) const {
  PredApp r{pred, {}};
  for (const auto& a : args) r.args.push_back(a.substitute(sub));
  return r;
}

std::string PredApp::to_string() const {
  std::string s = pred + "(";
  for (size_t k = 0; k < args.size(); ++k) s += (k ? ", " : "") + args[k].to_string();
  return s + ")";
}

std::vector<std::string> HornClause::universals() const {
  std::set<std::string> s = constraint.free_vars();
  for (const auto& b : body)
    for (const auto& v : b.vars()) s.insert(v);
  if (head)
    for (const auto& v : head->vars()) s.insert(v);
  return {s.begin(), s.end()};
}

std::string HornClause::to_string() const {
  std::string s;
  for (const auto& b : body) s += b.to_string() + " /\\ ";
  s += constraint.to_string() + " => " + (head ? head->to_string() : "false");
  return s;
}

const PredVar* CHCSystem::find(const std::string& name) const {
  for (const auto& p : preds)
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace impverif
