#include "impverif/qchc.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace impverif {

namespace {

bool is_head(const Sexp& e, const std::string& op) {
  return e.is_list && !e.list.empty() && !e.list[0].is_list && e.list[0].atom == op;
}

struct HornReader {
  CHCSystem& s;

  std::optional<PredApp> app(const Sexp& e) const {
    std::string name = e.is_list ? (e.list.empty() || e.list[0].is_list ? "" : e.list[0].atom) : e.atom;
    const PredVar* p = s.find(name);
    if (!p) return std::nullopt;
    PredApp a{name, {}};
    if (e.is_list)
      for (size_t k = 1; k < e.list.size(); ++k) {
        auto t = sexp_term(e.list[k]);
        if (!t) throw HornParseError("unreadable argument of " + name);
        a.args.push_back(*t);
      }
    if (a.args.size() != p->params.size()) throw HornParseError("arity mismatch for " + name);
    return a;
  }

  void body(const Sexp& e, HornClause& c, std::vector<Formula>& atoms) const {
    if (is_head(e, "and")) {
      for (size_t k = 1; k < e.list.size(); ++k) body(e.list[k], c, atoms);
      return;
    }
    if (auto a = app(e)) {
      c.body.push_back(*a);
      return;
    }
    auto f = sexp_formula(e);
    if (!f) throw HornParseError("unreadable clause body");
    atoms.push_back(*f);
  }

  HornClause clause(const Sexp& e0) const {
    const Sexp* e = &e0;
    if (is_head(*e, "forall")) {
      if (e->list.size() != 3) throw HornParseError("malformed forall");
      e = &e->list[2];
    }
    HornClause c;
    std::vector<Formula> atoms;
    const Sexp* head = e;
    if (is_head(*e, "=>")) {
      if (e->list.size() != 3) throw HornParseError("malformed implication");
      body(e->list[1], c, atoms);
      head = &e->list[2];
    }
    if (!head->is_list && head->atom == "false") {
      c.kind = "goal";
    } else if (auto a = app(*head)) {
      c.head = *a;
    } else {
      throw HornParseError("clause head is not a predicate application");
    }
    c.constraint = and_all(atoms);
    return c;
  }
};

}  // namespace

CHCSystem parse_smtlib_horn(const std::string& text) {
  CHCSystem s;
  std::map<std::string, std::vector<std::string>> names;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    auto semi = line.find(';');
    auto decl = line.find("(declare-fun ");
    if (semi == std::string::npos || decl == std::string::npos || decl > semi) continue;
    auto es = parse_sexps(line.substr(0, semi));
    if (es.empty() || es[0].list.size() < 2) continue;
    std::istringstream ps(line.substr(semi + 1));
    for (std::string w; ps >> w;) names[es[0].list[1].atom].push_back(w);
  }
  HornReader r{s};
  for (const auto& e : parse_sexps(text)) {
    if (is_head(e, "declare-fun")) {
      if (e.list.size() != 4 || !e.list[2].is_list) throw HornParseError("malformed declare-fun");
      PredVar p;
      p.name = e.list[1].atom;
      size_t n = e.list[2].list.size();
      auto it = names.find(p.name);
      if (it != names.end() && it->second.size() == n) {
        p.params = it->second;
      } else {
        for (size_t k = 0; k < n; ++k) p.params.push_back("$a" + std::to_string(k));
      }
      p.indexed = std::count(p.params.begin(), p.params.end(), "$i") > 0;
      s.preds.push_back(std::move(p));
    } else if (is_head(e, "assert")) {
      if (e.list.size() != 2) throw HornParseError("malformed assert");
      s.clauses.push_back(r.clause(e.list[1]));
    }
  }
  return s;
}

std::string print_chc_model(const CHCSystem& s, const ChcModel& m) {
  std::string out = "(\n";
  for (const auto& p : s.preds) {
    auto it = m.find(p.name);
    if (it == m.end()) continue;
    out += "  (define-fun " + smt_symbol(p.name) + " (";
    for (size_t k = 0; k < it->second.params.size(); ++k)
      out += std::string(k ? " " : "") + "(" + smt_symbol(it->second.params[k]) + " Int)";
    out += ") Bool " + smt_formula(it->second.body, {}) + ")\n";
  }
  return out + ")\n";
}

namespace {

Formula wf_region(const CHCSystem& s, const PredVar& p, std::set<size_t>& absorbed) {
  std::vector<Formula> parts;
  for (size_t k = 0; k < s.clauses.size(); ++k) {
    const auto& c = s.clauses[k];
    if (!c.head || c.head->pred != p.name || !c.body.empty()) continue;
    std::map<std::string, Term> sub;
    std::set<std::string> seen;
    bool plain = c.head->args.size() == p.params.size();
    for (size_t j = 0; plain && j < p.params.size(); ++j) {
      auto vs = c.head->args[j].vars();
      plain = vs.size() == 1 && c.head->args[j] == Term::var(*vs.begin()) && seen.insert(*vs.begin()).second;
      if (plain) sub[*vs.begin()] = Term::var(p.params[j]);
    }
    for (const auto& v : c.constraint.free_vars())
      if (!seen.count(v)) plain = false;
    if (!plain) continue;
    parts.push_back(c.constraint.substitute(sub));
    absorbed.insert(k);
  }
  return Formula::disj(parts);
}

std::vector<Formula> candidates(const PredVar& p) {
  std::vector<Formula> out;
  if (p.params.empty()) return out;
  const std::string& nu = p.params.back();
  std::vector<Term> ts{Term(Rational(0)), Term(Rational(1))};
  std::vector<std::string> scope;
  for (size_t k = 0; k + 1 < p.params.size(); ++k)
    if (p.params[k] != "$i") scope.push_back(p.params[k]);
  for (const auto& v : scope) ts.push_back(Term::var(v));
  if (!p.indexed)
    for (size_t a = 0; a < scope.size(); ++a)
      for (size_t b = a + 1; b < scope.size(); ++b) ts.push_back(Term::var(scope[a]) + Term::var(scope[b]));
  std::vector<Formula> off{Formula::bottom()};
  if (p.indexed) {
    off.push_back(Formula::atom(Term::var("$i"), Cmp::Ge, Term(1)));
    off.push_back(Formula::atom(Term::var("$i"), Cmp::Le, Term(-1)));
  }
  for (const auto& o : off)
    for (const auto& t : ts) {
      out.push_back(Formula::disj(o, Formula::atom(Term::var(nu), Cmp::Ge, t)));
      out.push_back(Formula::disj(o, Formula::atom(Term::var(nu), Cmp::Le, t)));
    }
  for (const auto& a : scope) {
    out.push_back(Formula::atom(Term::var(a), Cmp::Ge, Term(Rational(0))));
    out.push_back(Formula::atom(Term::var(a), Cmp::Ge, Term(Rational(1))));
    for (const auto& b : scope)
      if (a != b) out.push_back(Formula::atom(Term::var(a), Cmp::Ge, Term::var(b)));
  }
  return out;
}

}  // namespace

std::optional<ChcModel> solve_chc_qualifiers(const CHCSystem& s, const SolverConfig& cfg, int max_rounds) {
  struct State {
    Formula region;
    std::vector<Formula> cands;
  };
  std::map<std::string, State> st;
  std::set<size_t> absorbed;
  for (const auto& p : s.preds) st[p.name] = {wf_region(s, p, absorbed), candidates(p)};
  auto interp = [&](const std::string& pred) {
    const PredVar* p = s.find(pred);
    const State& x = st.at(pred);
    return ChcInterp{p->params, Formula::disj(x.region, and_all(x.cands))};
  };
  auto hyp_of = [&](const HornClause& c) {
    std::vector<Formula> hyp{c.constraint};
    for (const auto& b : c.body) hyp.push_back(apply_interp(interp(b.pred), b));
    return and_all(hyp);
  };
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<Formula> queries;
    std::vector<std::pair<std::string, size_t>> owner;
    for (size_t k = 0; k < s.clauses.size(); ++k) {
      const auto& c = s.clauses[k];
      if (absorbed.count(k) || !c.head) continue;
      const PredVar* p = s.find(c.head->pred);
      if (!p) return std::nullopt;
      const State& x = st.at(p->name);
      Formula hyp = hyp_of(c);
      for (size_t j = 0; j < x.cands.size(); ++j) {
        ChcInterp one{p->params, Formula::disj(x.region, x.cands[j])};
        queries.push_back(Formula::conj(hyp, Formula::negate(apply_interp(one, *c.head))));
        owner.emplace_back(p->name, j);
      }
    }
    auto res = check_sat_batch(queries, {}, cfg);
    std::map<std::string, std::set<size_t>> drop;
    for (size_t q = 0; q < res.size(); ++q)
      if (res[q].kind != SolverVerdict::Kind::Unsat) drop[owner[q].first].insert(owner[q].second);
    if (drop.empty()) {
      std::vector<Formula> goals;
      for (const auto& c : s.clauses)
        if (!c.head) goals.push_back(hyp_of(c));
      for (const auto& r : check_sat_batch(goals, {}, cfg))
        if (r.kind != SolverVerdict::Kind::Unsat) return std::nullopt;
      ChcModel m;
      for (const auto& p : s.preds) m[p.name] = interp(p.name);
      return m;
    }
    for (const auto& [name, js] : drop) {
      auto& cs = st.at(name).cands;
      std::vector<Formula> kept;
      for (size_t j = 0; j < cs.size(); ++j)
        if (!js.count(j)) kept.push_back(cs[j]);
      cs = std::move(kept);
    }
  }
  return std::nullopt;
}

}  // namespace impverif
