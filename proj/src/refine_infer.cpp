#include "impverif/refine_infer.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace impverif {

CHCSystem gen_chc(const TemplateTable& t, const OwnSolution& own, const std::map<std::string, Formula>& invariants) {
  CHCSystem s;
  s.preds = t.skeleton.preds;
  for (const auto& c : t.skeleton.clauses) {
    HornClause h = c;
    Formula f = own.eval(c.constraint);
    if (auto it = invariants.find(c.fn); it != invariants.end()) f = Formula::conj(it->second, f);
    h.constraint = f.simplified();
    if (h.constraint.is_false()) continue;
    s.clauses.push_back(std::move(h));
  }
  return s;
}

namespace {

std::string app_smt(const PredApp& a) {
  if (a.args.empty()) return smt_symbol(a.pred);
  std::string s = "(" + smt_symbol(a.pred);
  for (const auto& t : a.args) s += " " + smt_term(t, {});
  return s + ")";
}

}  // namespace

std::string emit_smtlib_horn(const CHCSystem& s) {
  std::ostringstream out;
  out << "(set-logic HORN)\n";
  std::vector<const PredVar*> decls;
  for (const auto& p : s.preds) decls.push_back(&p);
  std::sort(decls.begin(), decls.end(), [](const PredVar* a, const PredVar* b) { return a->name < b->name; });
  for (const PredVar* p : decls) {
    out << "(declare-fun " << smt_symbol(p->name) << " (";
    for (size_t k = 0; k < p->params.size(); ++k) out << (k ? " " : "") << "Int";
    out << ") Bool)";
    if (!p->params.empty()) {
      out << " ;";
      for (const auto& n : p->params) out << " " << n;
    }
    out << "\n";
  }
  for (const auto& c : s.clauses) {
    std::vector<std::string> body;
    for (const auto& b : c.body) body.push_back(app_smt(b));
    if (!c.constraint.is_true()) body.push_back(smt_formula(c.constraint, {}));
    std::string lhs = body.empty() ? "true" : body.size() == 1 ? body[0] : "";
    if (body.size() > 1) {
      lhs = "(and";
      for (const auto& b : body) lhs += " " + b;
      lhs += ")";
    }
    std::string rhs = c.head ? app_smt(*c.head) : "false";
    std::string f = "(=> " + lhs + " " + rhs + ")";
    auto vs = c.universals();
    if (vs.empty()) {
      out << "(assert " << f << ")\n";
      continue;
    }
    out << "(assert (forall (";
    for (size_t k = 0; k < vs.size(); ++k) out << (k ? " " : "") << "(" << smt_symbol(vs[k]) << " Int)";
    out << ") " << f << "))\n";
  }
  out << "(check-sat)\n";
  return out.str();
}

std::vector<std::string> check_chc(const CHCSystem& s) {
  std::vector<std::string> bad;
  std::set<std::string> has_wf;
  auto check_app = [&](const PredApp& a, size_t k) {
    const PredVar* p = s.find(a.pred);
    if (!p)
      bad.push_back("clause " + std::to_string(k) + ": undeclared predicate " + a.pred);
    else if (p->params.size() != a.args.size())
      bad.push_back("clause " + std::to_string(k) + ": arity mismatch for " + a.pred);
    for (const auto& t : a.args)
      for (const auto& [m, c] : t.monomials())
        if (denominator(c) != 1 || m.size() > 1)
          bad.push_back("clause " + std::to_string(k) + ": non-integer linear argument of " + a.pred);
  };
  std::function<void(const Formula&, size_t)> check_f = [&](const Formula& f, size_t k) {
    if (f.kind() == Formula::Kind::Atom) {
      for (const Term* t : {&f.lhs(), &f.rhs()})
        for (const auto& [m, c] : t->monomials())
          if (m.size() > 1) bad.push_back("clause " + std::to_string(k) + ": nonlinear atom " + f.to_string());
      return;
    }
    if (f.kind() == Formula::Kind::True || f.kind() == Formula::Kind::False) return;
    for (const auto& c : f.children()) check_f(c, k);
  };
  for (size_t k = 0; k < s.clauses.size(); ++k) {
    const auto& c = s.clauses[k];
    for (const auto& b : c.body) check_app(b, k);
    if (c.head) {
      check_app(*c.head, k);
      if (c.kind == "wf") has_wf.insert(c.head->pred);
    }
    check_f(c.constraint, k);
  }
  for (const auto& p : s.preds)
    if (p.indexed && !has_wf.count(p.name)) bad.push_back("no well-formedness clause for " + p.name);
  return bad;
}

const char* chc_kind_name(ChcResult::Kind k) {
  switch (k) {
    case ChcResult::Kind::Sat: return "sat";
    case ChcResult::Kind::Unsat: return "unsat";
    case ChcResult::Kind::Unknown: return "unknown";
    case ChcResult::Kind::Error: return "error";
  }
  return "?";
}

ChcResult solve_chc(const std::string& script, const SolverConfig& cfg) {
  std::string s = script;
  auto pos = s.rfind("(check-sat)");
  if (pos != std::string::npos) s.insert(pos + 11, "\n(get-model)");
  SolverVerdict v = run_horn(s, cfg);
  ChcResult r;
  r.model_text = v.model_text;
  r.diagnostic = v.diagnostic;
  switch (v.kind) {
    case SolverVerdict::Kind::Sat: r.kind = ChcResult::Kind::Sat; break;
    case SolverVerdict::Kind::Unsat: r.kind = ChcResult::Kind::Unsat; break;
    case SolverVerdict::Kind::Unknown: r.kind = ChcResult::Kind::Unknown; break;
    case SolverVerdict::Kind::Error: r.kind = ChcResult::Kind::Error; break;
  }
  return r;
}

// ---------------------------------------------------------------- model audit

namespace {

struct ModelReader {
  using Env = std::map<std::string, Sexp>;

  static std::optional<Rational> number(const std::string& a) {
    if (a.empty()) return std::nullopt;
    for (char c : a)
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return Rational(BigInt(a));
  }

  static const Sexp& resolve(const Sexp& e, const Env& env) {
    if (!e.is_list)
      if (auto it = env.find(e.atom); it != env.end()) return it->second;
    return e;
  }

  static std::optional<Term> term(const Sexp& e0, const Env& env) {
    const Sexp& e = resolve(e0, env);
    if (!e.is_list) {
      if (auto n = number(e.atom)) return Term(*n);
      return Term::var(e.atom);
    }
    if (e.list.empty() || e.list[0].is_list) return std::nullopt;
    const std::string& op = e.list[0].atom;
    std::vector<Term> args;
    for (size_t k = 1; k < e.list.size(); ++k) {
      auto t = term(e.list[k], env);
      if (!t) return std::nullopt;
      args.push_back(*t);
    }
    if (args.empty()) return std::nullopt;
    if (op == "+") {
      Term r;
      for (const auto& a : args) r += a;
      return r;
    }
    if (op == "-") {
      if (args.size() == 1) return -args[0];
      Term r = args[0];
      for (size_t k = 1; k < args.size(); ++k) r -= args[k];
      return r;
    }
    if (op == "*") {
      Term r = args[0];
      for (size_t k = 1; k < args.size(); ++k) r = r * args[k];
      return r;
    }
    return std::nullopt;
  }

  static std::optional<Formula> formula(const Sexp& e0, const Env& env) {
    const Sexp& e = resolve(e0, env);
    if (!e.is_list) {
      if (e.atom == "true") return Formula::top();
      if (e.atom == "false") return Formula::bottom();
      return std::nullopt;
    }
    if (e.list.empty() || e.list[0].is_list) return std::nullopt;
    const std::string& op = e.list[0].atom;
    if (op == "let" && e.list.size() == 3 && e.list[1].is_list) {
      Env inner = env;
      for (const auto& b : e.list[1].list) {
        if (!b.is_list || b.list.size() != 2 || b.list[0].is_list) return std::nullopt;
        inner[b.list[0].atom] = resolve(b.list[1], env);
      }
      return formula(e.list[2], inner);
    }
    static const std::map<std::string, Cmp> cmps = {
        {"<=", Cmp::Le}, {">=", Cmp::Ge}, {"<", Cmp::Lt}, {">", Cmp::Gt}, {"=", Cmp::Eq}};
    if (auto it = cmps.find(op); it != cmps.end() && e.list.size() == 3) {
      auto a = term(e.list[1], env), b = term(e.list[2], env);
      if (a && b) return Formula::atom(*a, it->second, *b);
      if (op != "=") return std::nullopt;
      auto fa = formula(e.list[1], env), fb = formula(e.list[2], env);
      if (!fa || !fb) return std::nullopt;
      return Formula::conj(Formula::implies(*fa, *fb), Formula::implies(*fb, *fa));
    }
    std::vector<Formula> args;
    for (size_t k = 1; k < e.list.size(); ++k) {
      auto f = formula(e.list[k], env);
      if (!f) return std::nullopt;
      args.push_back(*f);
    }
    if (op == "and") return Formula::conj(args);
    if (op == "or") return Formula::disj(args);
    if (op == "not" && args.size() == 1) return Formula::negate(args[0]);
    if (op == "=>" && args.size() == 2) return Formula::implies(args[0], args[1]);
    if (op == "ite" && args.size() == 3)
      return Formula::disj(Formula::conj(args[0], args[1]), Formula::conj(Formula::negate(args[0]), args[2]));
    return std::nullopt;
  }
};

bool has_quantifier(const Sexp& e) {
  if (!e.is_list) return false;
  if (!e.list.empty() && !e.list[0].is_list && (e.list[0].atom == "exists" || e.list[0].atom == "forall")) return true;
  return std::any_of(e.list.begin(), e.list.end(), has_quantifier);
}

void collect_interps(const Sexp& e, ChcModel& out, std::set<std::string>& quantified, bool& ok) {
  if (!e.is_list) return;
  if (e.list.size() == 5 && !e.list[0].is_list && e.list[0].atom == "define-fun" && e.list[2].is_list) {
    ChcInterp in;
    for (const auto& p : e.list[2].list) {
      if (!p.is_list || p.list.empty() || p.list[0].is_list) {
        ok = false;
        return;
      }
      in.params.push_back(p.list[0].atom);
    }
    if (has_quantifier(e.list[4])) {
      quantified.insert(e.list[1].atom);
      return;
    }
    auto f = ModelReader::formula(e.list[4], {});
    if (!f) {
      ok = false;
      return;
    }
    in.body = *f;
    out[e.list[1].atom] = std::move(in);
    return;
  }
  for (const auto& c : e.list) collect_interps(c, out, quantified, ok);
}

}  // namespace

Formula apply_interp(const ChcInterp& in, const PredApp& a) {
  std::map<std::string, Term> sub;
  for (size_t k = 0; k < in.params.size() && k < a.args.size(); ++k) sub[in.params[k]] = a.args[k];
  return in.body.substitute(sub);
}

std::optional<Formula> sexp_formula(const Sexp& e) { return ModelReader::formula(e, {}); }
std::optional<Term> sexp_term(const Sexp& e) { return ModelReader::term(e, {}); }

std::optional<ChcModel> read_chc_model(const std::string& text, std::set<std::string>* quantified) {
  ChcModel m;
  std::set<std::string> q;
  bool ok = true;
  for (const auto& e : parse_sexps(text)) collect_interps(e, m, q, ok);
  if (!ok) return std::nullopt;
  if (quantified) *quantified = std::move(q);
  return m;
}

ChcAudit audit_chc_model(const CHCSystem& s, const ChcModel& model, const SolverConfig& cfg) {
  ChcAudit r;
  std::vector<Formula> queries;
  std::vector<size_t> idx;
  for (size_t k = 0; k < s.clauses.size(); ++k) {
    const auto& c = s.clauses[k];
    std::vector<Formula> hyp{c.constraint};
    bool known = true;
    auto apply = [&](const PredApp& a) {
      auto it = model.find(a.pred);
      if (it == model.end()) {
        known = false;
        return Formula::top();
      }
      return apply_interp(it->second, a);
    };
    for (const auto& b : c.body) hyp.push_back(apply(b));
    Formula head = c.head ? apply(*c.head) : Formula::bottom();
    if (!known) {
      r.skipped.push_back(k);
      continue;
    }
    queries.push_back(Formula::conj(and_all(hyp), Formula::negate(head)));
    idx.push_back(k);
  }
  auto res = check_sat_batch(queries, {}, cfg);
  for (size_t j = 0; j < res.size(); ++j)
    if (res[j].kind != SolverVerdict::Kind::Unsat) r.invalid.push_back(idx[j]);
  return r;
}

}  // namespace impverif
