#include "impverif/own_infer.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

namespace impverif {

namespace {

const std::string kI = "$i";
const std::string kV = "$nu";

Term V(const std::string& x) { return Term::var(x); }
Formula le(const Term& a, const Term& b) { return Formula::atom(a, Cmp::Le, b); }
Formula lt(const Term& a, const Term& b) { return Formula::atom(a, Cmp::Lt, b); }
Formula ge(const Term& a, const Term& b) { return Formula::atom(a, Cmp::Ge, b); }
Formula eq(const Term& a, const Term& b) { return Formula::atom(a, Cmp::Eq, b); }

// Ownership of one pointer at one program point.
struct Instance {
  int id = 0;
  Term lo, hi, o;
  std::optional<PredApp> pred;  // nullopt: carries no information
  std::set<std::string> vars;   // program variables mentioned
};

struct Fact {
  std::optional<PredApp> app;
  Formula f;
  std::set<std::string> vars;
};

struct Ctx {
  std::string fn;
  std::map<std::string, std::string> names;  // source name -> unique name
  std::map<std::string, Term> defs;          // int variable -> term over free variables
  std::vector<std::string> free;
  std::set<std::string> heap;  // free variables read from the heap; not template variables
  std::map<std::string, Derived> derived;
  std::map<std::string, int> ptrs;  // pointer -> instance index
  std::vector<Formula> path;
  std::vector<Fact> facts;
  std::set<std::string> scope_vars;  // free variables visible at the scope entry
};

struct Leaf {
  Ctx ctx;
  std::optional<Term> value;  // nullopt: the expression yields a pointer
};

Formula in_interval(const Instance& a, const Term& idx) {
  return Formula::conj({Formula::atom(a.o, Cmp::Gt, Term(0)), le(a.lo, idx), le(idx, a.hi)});
}

// a >= b pointwise: inclusion of intervals and larger ownership.
Formula covers(const Instance& a, const Instance& b) {
  return Formula::conj({le(a.lo, b.lo), le(b.hi, a.hi), ge(a.o, b.o)});
}

std::set<std::string> term_vars(std::initializer_list<const Term*> ts) {
  std::set<std::string> out;
  for (const Term* t : ts)
    for (const auto& v : t->vars()) out.insert(v);
  return out;
}

class Walker {
 public:
  Walker(const Program& p, const SimpleTypeTable& st) : prog_(p), st_(st) {}

  TemplateTable run() {
    check_shapes();
    for (const auto& d : prog_.defs) setup_fun(d);
    for (const auto& d : prog_.defs) walk_fun(d);
    Ctx main;
    main.fn = "";
    used_.clear();
    for (auto& leaf : walk(prog_.main, main)) exit_main(leaf.ctx);
    return std::move(t_);
  }

  std::vector<std::tuple<std::string, Formula, Formula>> assert_paths;

 private:
  const Program& prog_;
  const SimpleTypeTable& st_;
  TemplateTable t_;
  std::vector<Instance> inst_;
  std::set<std::string> used_;
  int dcount_ = 0;
  int nsel_ = 0;

  // ------------------------------------------------------------ shapes

  void check_shapes() {
    for (const auto& [fn, vars] : st_.vars)
      for (const auto& [x, ty] : vars)
        if (ty.ref_depth > 1) throw Unsupported("nested pointers ('" + x + "' has type " + ty.to_string() + ")");
    for (const auto& [fn, sig] : st_.funs) {
      if (sig.ret.is_ref()) throw Unsupported("reference-typed result of '" + fn + "'");
      for (const auto& p : sig.params)
        if (p.ref_depth > 1) throw Unsupported("nested pointers (parameter of '" + fn + "')");
    }
  }

  bool is_ptr(const std::string& fn, const std::string& x) const {
    return st_.has(fn, x) && st_.var(fn, x).is_ref();
  }

  // ------------------------------------------------------------ naming

  std::string bind_name(Ctx& c, const std::string& x) {
    std::string u = x;
    for (int k = 1; used_.count(u); ++k) u = x + "#" + std::to_string(k);
    used_.insert(u);
    c.names[x] = u;
    return u;
  }

  const std::string& uname(const Ctx& c, const std::string& x) const {
    auto it = c.names.find(x);
    if (it == c.names.end()) throw Unsupported("unbound variable '" + x + "'");
    return it->second;
  }

  Term def(const Ctx& c, const std::string& x) const {
    const std::string& u = uname(c, x);
    auto it = c.defs.find(u);
    if (it == c.defs.end()) throw Unsupported("'" + x + "' used as an integer");
    return it->second;
  }

  Term def(const Ctx& c, const Operand& o) const { return o.is_var() ? def(c, o.name()) : Term(Rational(o.value())); }

  void bind_int_def(Ctx& c, const std::string& x, Term t) { c.defs[bind_name(c, x)] = std::move(t); }

  std::string bind_int_free(Ctx& c, const std::string& x) {
    std::string u = bind_name(c, x);
    c.defs[u] = V(u);
    c.free.push_back(u);
    return u;
  }

  Instance& inst(const Ctx& c, const std::string& x) {
    const std::string& u = uname(c, x);
    auto it = c.ptrs.find(u);
    if (it == c.ptrs.end()) throw Unsupported("'" + x + "' is not a live pointer");
    return inst_[it->second];
  }

  int add_instance(Instance i) {
    i.id = static_cast<int>(inst_.size());
    inst_.push_back(std::move(i));
    return inst_.back().id;
  }

  // ------------------------------------------------------------ templates

  OwnTemplate& new_template(const std::string& fn, const std::string& var, const std::string& site,
                            const std::vector<std::string>& vars) {
    OwnTemplate t;
    t.id = static_cast<int>(t_.templates.size());
    t.fn = fn;
    t.var = var;
    t.site = site;
    t.vars = vars;
    std::string id = std::to_string(t.id);
    for (size_t k = 0; k <= vars.size(); ++k) {
      t.lo_coeffs.push_back("$c" + id + "_" + std::to_string(k));
      t.hi_coeffs.push_back("$d" + id + "_" + std::to_string(k));
      t_.unknowns[t.lo_coeffs.back()] = Sort::Int;
      t_.unknowns[t.hi_coeffs.back()] = Sort::Int;
    }
    t.own = "$o" + id;
    t_.unknowns[t.own] = Sort::Real;
    t.lo = V(t.lo_coeffs[0]);
    t.hi = V(t.hi_coeffs[0]);
    for (size_t k = 0; k < vars.size(); ++k) {
      t.lo += V(t.lo_coeffs[k + 1]) * V(vars[k]);
      t.hi += V(t.hi_coeffs[k + 1]) * V(vars[k]);
    }
    t_.templates.push_back(std::move(t));
    return t_.templates.back();
  }

  void declare(const std::string& name, std::vector<std::string> params, bool indexed, const std::string& role) {
    if (indexed) params.push_back(kI);
    params.push_back(kV);
    t_.skeleton.preds.push_back({name, std::move(params), indexed, role});
  }

  static std::vector<Term> arg_terms(const std::vector<std::string>& vars, bool indexed) {
    std::vector<Term> args;
    for (const auto& v : vars) args.push_back(V(v));
    if (indexed) args.push_back(V(kI));
    args.push_back(V(kV));
    return args;
  }

  Instance instance_of(const OwnTemplate& t, const std::string& pred) {
    Instance i;
    i.lo = t.lo;
    i.hi = t.hi;
    i.o = V(t.own);
    i.pred = PredApp{pred, arg_terms(t.vars, true)};
    i.vars.insert(t.vars.begin(), t.vars.end());
    return i;
  }

  // Fresh template for `var` at the current point, with its predicate and
  // well-formedness clause.
  int fresh(Ctx& c, const std::string& var, const std::string& site) {
    std::vector<std::string> vars;
    for (const auto& v : c.free)
      if (!c.heap.count(v)) vars.push_back(v);
    OwnTemplate& t = new_template(c.fn, var, site, vars);
    std::string pred = "P" + std::to_string(t.id);
    declare(pred, t.vars, true, "elem");
    int k = add_instance(instance_of(t, pred));
    wf_clause(c, inst_[k]);
    return k;
  }

  void wf_clause(const Ctx& c, const Instance& a) {
    clause(c, "wf", {}, Formula::negate(in_interval(a, V(kI))), *a.pred);
  }

  // One case for all values of the universals: `$s = k && case_k`.
  Formula choose(const std::vector<Formula>& cases) {
    std::string sel = "$s" + std::to_string(nsel_++);
    t_.unknowns[sel] = Sort::Int;
    std::vector<Formula> alts;
    for (size_t k = 0; k < cases.size(); ++k)
      alts.push_back(Formula::conj(eq(V(sel), Term(static_cast<int>(k))), cases[k]));
    return Formula::disj(std::move(alts));
  }

  // ------------------------------------------------------------ emission

  Formula guard(const Ctx& c) const {
    std::vector<Formula> parts = c.path;
    for (const auto& f : c.facts)
      if (!f.app) parts.push_back(f.f);
    return and_all(parts);
  }

  void constrain(const Ctx& c, char schema, const std::string& site, Formula body,
                 std::optional<Formula> preferred = std::nullopt) {
    OwnConstraint k;
    k.fn = c.fn;
    k.schema = schema;
    k.site = site;
    k.guard = guard(c);
    k.body = std::move(body);
    k.preferred = std::move(preferred);
    std::set<std::string> u = k.guard.free_vars();
    for (const auto& v : k.body.free_vars()) u.insert(v);
    for (const auto& v : u)
      if (!t_.unknowns.count(v)) k.universals.push_back(v);
    k.derived = c.derived;
    t_.constraints.push_back(std::move(k));
  }

  // A fact is left out when every variable it shares with the clause is
  // carried by the head: an argument determines it, and the reader of the head
  // assumes the fact again (any later goal of the same scope does; for heads
  // read in another scope this holds only for variables visible at the scope
  // entry).
  void clause(const Ctx& c, const std::string& kind, std::vector<PredApp> body, const Formula& extra,
              const std::optional<PredApp>& head) {
    static const std::set<std::string> boundary = {"post", "ret", "call-pre", "join", "join-value"};
    bool crosses = boundary.count(kind) > 0;
    std::set<std::string> carried, live = extra.free_vars();
    if (head) {
      for (const auto& a : head->args) {
        auto vs = a.vars();
        if (vs.size() == 1 && a.degree() == 1 && (!crosses || c.scope_vars.count(*vs.begin())))
          carried.insert(*vs.begin());
      }
      for (const auto& v : head->vars())
        if (!carried.count(v)) live.insert(v);
    }
    for (const auto& p : c.path)
      for (const auto& v : p.free_vars()) live.insert(v);
    for (const auto& b : body)
      for (const auto& v : b.vars()) live.insert(v);
    std::vector<bool> keep(c.facts.size(), false);
    for (bool grew = true; grew;) {
      grew = false;
      for (size_t k = 0; k < c.facts.size(); ++k) {
        if (keep[k]) continue;
        const auto& vs = c.facts[k].vars;
        if (std::none_of(vs.begin(), vs.end(), [&](const std::string& v) { return live.count(v) && !carried.count(v); }))
          continue;
        keep[k] = grew = true;
        live.insert(vs.begin(), vs.end());
      }
    }
    std::vector<Formula> parts = c.path;
    std::vector<PredApp> apps;
    for (size_t k = 0; k < c.facts.size(); ++k) {
      if (!keep[k]) continue;
      if (c.facts[k].app)
        apps.push_back(*c.facts[k].app);
      else
        parts.push_back(c.facts[k].f);
    }
    for (auto& b : body) apps.push_back(std::move(b));
    if (!extra.is_true()) parts.push_back(extra);
    HornClause h;
    h.kind = kind;
    h.fn = c.fn;
    h.body = std::move(apps);
    h.constraint = and_all(parts);
    h.head = head;
    t_.skeleton.clauses.push_back(std::move(h));
  }

  static std::optional<PredApp> at(const Instance& a, const Term& idx, const Term& val) {
    if (!a.pred) return std::nullopt;
    return a.pred->substitute({{kI, idx}, {kV, val}});
  }

  static std::vector<PredApp> opt(const std::optional<PredApp>& a) {
    if (a) return {*a};
    return {};
  }

  void add_fact(Ctx& c, PredApp app) {
    Fact f;
    f.vars = app.vars();
    f.app = std::move(app);
    c.facts.push_back(std::move(f));
  }

  void add_lin_fact(Ctx& c, Formula phi) {
    Fact f;
    f.vars = phi.free_vars();
    f.f = std::move(phi);
    c.facts.push_back(std::move(f));
  }

  // ------------------------------------------------------------ functions

  void setup_fun(const Def& d) {
    FunTemplates ft;
    const auto& sig = st_.funs.at(d.name);
    for (size_t k = 0; k < d.params.size(); ++k)
      if (sig.params[k].is_int()) ft.int_formals.push_back(d.params[k]);
    for (size_t k = 0; k < d.params.size(); ++k) {
      if (!sig.params[k].is_ref()) continue;
      const std::string& p = d.params[k];
      OwnTemplate& pre = new_template(d.name, p, "pre", ft.int_formals);
      ft.pre[p] = pre.id;
      declare("Pre_" + d.name + "_" + p, ft.int_formals, true, "pre-ptr");
      OwnTemplate& post = new_template(d.name, p, "post", ft.int_formals);
      ft.post[p] = post.id;
      declare("Post_" + d.name + "_" + p, ft.int_formals, true, "post-ptr");
    }
    if (!ft.int_formals.empty()) {
      declare("Pre_" + d.name, ft.int_formals, false, "pre");
      t_.skeleton.preds.back().params.pop_back();
    }
    declare("Ret_" + d.name, ft.int_formals, false, "ret");
    t_.funs[d.name] = std::move(ft);
  }

  void walk_fun(const Def& d) {
    used_.clear();
    const FunTemplates& ft = t_.funs.at(d.name);
    const auto& sig = st_.funs.at(d.name);
    Ctx c;
    c.fn = d.name;
    for (size_t k = 0; k < d.params.size(); ++k)
      if (sig.params[k].is_int()) bind_int_free(c, d.params[k]);
    if (!ft.int_formals.empty()) {
      PredApp pre{"Pre_" + d.name, arg_terms(ft.int_formals, false)};
      pre.args.pop_back();
      add_fact(c, pre);
    }
    c.scope_vars.insert(c.free.begin(), c.free.end());
    for (size_t k = 0; k < d.params.size(); ++k) {
      if (!sig.params[k].is_ref()) continue;
      const std::string& p = d.params[k];
      std::string u = bind_name(c, p);
      const OwnTemplate& pre = t_.templates[ft.pre.at(p)];
      int i = add_instance(instance_of(pre, "Pre_" + d.name + "_" + p));
      c.ptrs[u] = i;
      wf_clause(c, inst_[i]);
      const OwnTemplate& post = t_.templates[ft.post.at(p)];
      Instance pi = instance_of(post, "Post_" + d.name + "_" + p);
      wf_clause(c, pi);
    }
    std::vector<Leaf> leaves = walk(d.body, c);
    PredApp ret{"Ret_" + d.name, arg_terms(ft.int_formals, false)};
    for (const auto& leaf : leaves) {
      for (const auto& [p, tid] : ft.post) {
        const Instance& b = inst_[leaf.ctx.ptrs.at(p)];
        Instance post = instance_of(t_.templates[tid], "Post_" + d.name + "_" + p);
        constrain(leaf.ctx, 'a', "return from " + d.name + " (" + p + ")", covers(b, post),
                  Formula::conj({eq(b.lo, post.lo), eq(b.hi, post.hi), eq(b.o, post.o)}));
        clause(leaf.ctx, "post", opt(at(b, V(kI), V(kV))), in_interval(post, V(kI)), post.pred);
      }
      if (!leaf.value) throw Unsupported("reference-valued result in '" + d.name + "'");
      clause(leaf.ctx, "ret", {}, Formula::top(), ret.substitute({{kV, *leaf.value}}));
    }
  }

  // ------------------------------------------------------------ expressions

  std::vector<Leaf> walk(const ExprPtr& ep, Ctx c) {
    const Expr& e = *ep;
    switch (e.kind) {
      case Expr::Kind::IntLit: return {Leaf{std::move(c), Term(Rational(e.value))}};
      case Expr::Kind::Var: {
        if (is_ptr(c.fn, e.x)) return {Leaf{std::move(c), std::nullopt}};
        Term v = def(c, e.x);
        return {Leaf{std::move(c), v}};
      }
      case Expr::Kind::Let: return walk_let(e, std::move(c));
      case Expr::Kind::IfNp: {
        Term x = def(c, e.x);
        Ctx t = c, f = std::move(c);
        t.path.push_back(le(x, Term(0)));
        f.path.push_back(Formula::atom(x, Cmp::Gt, Term(0)));
        std::vector<Leaf> out = walk(e.body, std::move(t));
        for (auto& l : walk(e.else_branch, std::move(f))) out.push_back(std::move(l));
        return out;
      }
      case Expr::Kind::MkArray: {
        std::string site = "let " + e.x + " = mkarray " + e.value.str();
        std::string u = bind_name(c, e.x);
        int k = fresh(c, e.x, "alloc");
        const Instance& a = inst_[k];
        constrain(c, 'e', site,
                  Formula::conj({eq(a.lo, Term(0)), eq(a.hi, Term(Rational(e.value - 1))), eq(a.o, Term(1))}));
        clause(c, "alloc", {}, Formula::top(), a.pred);
        c.ptrs[u] = k;
        return walk(e.body, std::move(c));
      }
      case Expr::Kind::Assign: {
        std::string site = e.x + " := " + e.src.to_string();
        Term s = def(c, e.src);
        Instance a = inst(c, e.x);
        constrain(c, 'b', site, Formula::conj({eq(a.o, Term(1)), le(a.lo, Term(0)), le(Term(0), a.hi)}));
        int k = fresh(c, e.x, "assign");
        const Instance& n = inst_[k];
        constrain(c, 'a', site, covers(a, n));
        clause(c, "write", {}, Formula::conj(eq(V(kI), Term(0)), eq(V(kV), s)), n.pred);
        clause(c, "frame", opt(a.pred), Formula::conj(Formula::atom(V(kI), Cmp::Ne, Term(0)), in_interval(n, V(kI))),
               n.pred);
        c.ptrs[uname(c, e.x)] = k;
        return walk(e.body, std::move(c));
      }
      case Expr::Kind::AliasDeref:
        if (is_ptr(c.fn, e.x)) throw Unsupported("nested pointers (alias(" + e.x + " = *" + e.y + "))");
        return walk(e.body, std::move(c));
      case Expr::Kind::AliasAddPtr: {
        merge(c, e);
        return walk(e.body, std::move(c));
      }
      case Expr::Kind::Assert: {
        std::map<std::string, Term> sub;
        for (const auto& v : e.formula.free_vars()) sub[v] = def(c, v);
        Formula phi = e.formula.substitute(sub);
        std::map<std::string, std::string> ren;
        for (const auto& v : e.formula.free_vars()) ren[v] = uname(c, v);
        assert_paths.emplace_back(c.fn, e.formula.rename(ren), and_all(c.path));
        clause(c, "goal", {}, Formula::negate(phi), std::nullopt);
        return walk(e.body, std::move(c));
      }
      case Expr::Kind::If: throw Unsupported("surface conditional in core program");
    }
    return {};
  }

  std::vector<Leaf> walk_let(const Expr& e, Ctx c) {
    const Rhs& r = e.rhs;
    const std::string& x = e.x;
    switch (r.kind) {
      case Rhs::Kind::IntLit: bind_int_def(c, x, Term(Rational(r.value))); break;
      case Rhs::Kind::Var:
        if (is_ptr(c.fn, r.y))
          split(c, x, r.y, Term(0), "let " + x + " = " + r.y);
        else
          bind_int_def(c, x, def(c, r.y));
        break;
      case Rhs::Kind::Nondet: bind_int_free(c, x); break;
      case Rhs::Kind::BinOp: binop(c, x, r); break;
      case Rhs::Kind::Neg: throw Unsupported("negation in core program");
      case Rhs::Kind::Deref: {
        Instance a = inst(c, r.y);
        constrain(c, 'c', "let " + x + " = *" + r.y,
                  Formula::conj({Formula::atom(a.o, Cmp::Gt, Term(0)), le(a.lo, Term(0)), le(Term(0), a.hi)}));
        std::string u = bind_int_free(c, x);
        c.heap.insert(u);
        if (auto f = at(a, Term(0), V(u))) add_fact(c, *f);
        break;
      }
      case Rhs::Kind::AddPtr: split(c, x, r.y, def(c, r.z), "let " + x + " = " + r.y + " + " + r.z); break;
      case Rhs::Kind::Call: call(c, x, r); break;
      case Rhs::Kind::Sub: return sub(c, e);
    }
    return walk(e.body, std::move(c));
  }

  void binop(Ctx& c, const std::string& x, const Rhs& r) {
    Term a = def(c, r.a), b = def(c, r.b);
    switch (r.op) {
      case BinOpKind::Add: bind_int_def(c, x, a + b); return;
      case BinOpKind::Sub: bind_int_def(c, x, a - b); return;
      case BinOpKind::Mul:
        if (a.is_constant())
          bind_int_def(c, x, b * a.constant_part());
        else if (b.is_constant())
          bind_int_def(c, x, a * b.constant_part());
        else
          bind_int_free(c, x);
        return;
      case BinOpKind::Div: {
        if (!b.is_constant()) {
          clause(c, "div-goal", {}, eq(b, Term(0)), std::nullopt);
          bind_int_free(c, x);
          return;
        }
        Rational k = b.constant_part();
        if (k == 0) {
          clause(c, "div-goal", {}, Formula::top(), std::nullopt);
          bind_int_free(c, x);
          return;
        }
        std::string u = bind_int_free(c, x);
        BigInt kk = numerator(k);
        BigInt mag = kk < 0 ? BigInt(-kk) : kk;
        Term rem = a - V(u) * k;
        Term m1(Rational(mag - 1));
        add_lin_fact(c, Formula::conj(Formula::implies(ge(a, Term(0)), Formula::conj(le(Term(0), rem), le(rem, m1))),
                                      Formula::implies(lt(a, Term(0)), Formula::conj(le(-m1, rem), le(rem, Term(0))))));
        c.derived[u] = Derived{a, kk};
        return;
      }
    }
  }

  void split(Ctx& c, const std::string& x, const std::string& y, const Term& z, const std::string& site) {
    Instance a = inst(c, y);
    std::string yu = uname(c, y);
    int k2 = fresh(c, y, "split-parent");
    std::string xu = bind_name(c, x);
    int k3 = fresh(c, x, "split-child");
    const Instance& p = inst_[k2];
    const Instance& q = inst_[k3];
    constrain(c, 'd', site, covers(a, p));
    constrain(c, 'd', site, Formula::conj({le(a.lo - z, q.lo), le(q.hi, a.hi - z), ge(a.o, q.o)}));
    constrain(c, 'd', site, choose({ge(a.o, p.o + q.o), lt(q.hi, p.lo - z), lt(p.hi - z, q.lo)}));
    clause(c, "shift-parent", opt(at(a, V(kI), V(kV))), in_interval(p, V(kI)), p.pred);
    clause(c, "shift", opt(at(a, V(kI) + z, V(kV))), in_interval(q, V(kI)), q.pred);
    c.ptrs[yu] = k2;
    c.ptrs[xu] = k3;
  }

  void merge(Ctx& c, const Expr& e) {
    if (!is_ptr(c.fn, e.x) || !is_ptr(c.fn, e.y)) throw Unsupported("alias between non-pointers");
    std::string site = std::string(e.auto_alias ? "autoalias(" : "alias(") + e.x + " = " + e.y + " + " + e.z + ")";
    Term z = def(c, e.z);
    Instance a = inst(c, e.y), b = inst(c, e.x);
    int k = fresh(c, e.y, "merge");
    const Instance& m = inst_[k];
    Term bl = b.lo + z, bh = b.hi + z;
    constrain(c, 'g', site,
              choose({eq(m.o, Term(0)),
                             Formula::conj({le(a.lo, m.lo), le(m.hi, a.hi), le(m.o, a.o)}),
                             Formula::conj({le(bl, m.lo), le(m.hi, bh), le(m.o, b.o)}),
                             Formula::conj({le(a.lo, m.lo), le(m.hi, bh), le(bl, a.hi + Term(1)), le(m.o, a.o),
                                            le(m.o, b.o)}),
                             Formula::conj({le(bl, m.lo), le(m.hi, a.hi), le(a.lo, bh + Term(1)), le(m.o, a.o),
                                            le(m.o, b.o)})}));
    clause(c, "merge", opt(at(a, V(kI), V(kV))), Formula::conj(in_interval(m, V(kI)), in_interval(a, V(kI))), m.pred);
    clause(c, "merge", opt(at(b, V(kI) - z, V(kV))), Formula::conj(in_interval(m, V(kI)), in_interval(b, V(kI) - z)),
           m.pred);
    Instance zero;
    zero.lo = Term(0);
    zero.hi = Term(-1);
    zero.o = Term(0);
    c.ptrs[uname(c, e.y)] = k;
    c.ptrs[uname(c, e.x)] = add_instance(zero);
  }

  void call(Ctx& c, const std::string& x, const Rhs& r) {
    const Def* d = prog_.find(r.fn);
    if (!d) throw Unsupported("call to undefined function '" + r.fn + "'");
    const FunTemplates& ft = t_.funs.at(r.fn);
    const auto& sig = st_.funs.at(r.fn);
    std::map<std::string, Term> sigma;
    std::set<std::string> seen;
    for (size_t k = 0; k < d->params.size(); ++k) {
      const Operand& a = r.args[k];
      if (sig.params[k].is_int()) {
        sigma[d->params[k]] = def(c, a);
      } else if (!seen.insert(uname(c, a.name())).second) {
        throw Unsupported("pointer '" + a.name() + "' passed twice to '" + r.fn + "'");
      }
    }
    std::string site = "let " + x + " = " + r.fn + "(...)";
    CallSite cs;
    cs.caller = c.fn;
    cs.callee = r.fn;
    cs.guard = guard(c);
    cs.actuals = sigma;
    t_.calls.push_back(std::move(cs));
    auto sub_args = [&](const std::vector<std::string>& formals, bool indexed) {
      std::vector<Term> args;
      for (const auto& f : formals) args.push_back(sigma.at(f));
      if (indexed) args.push_back(V(kI));
      args.push_back(V(kV));
      return args;
    };
    if (!ft.int_formals.empty()) {
      std::vector<Term> args = sub_args(ft.int_formals, false);
      args.pop_back();
      clause(c, "call-pre", {}, Formula::top(), PredApp{"Pre_" + r.fn, args});
    }
    std::vector<std::pair<std::string, int>> after;
    for (size_t k = 0; k < d->params.size(); ++k) {
      if (!sig.params[k].is_ref()) continue;
      const std::string& p = d->params[k];
      const std::string& y = r.args[k].name();
      Instance a = inst(c, y);
      const OwnTemplate& pre = t_.templates[ft.pre.at(p)];
      Instance spre;
      spre.lo = pre.lo.substitute(sigma);
      spre.hi = pre.hi.substitute(sigma);
      spre.o = V(pre.own);
      constrain(c, 'f', site, covers(a, spre));
      clause(c, "call-pre", opt(at(a, V(kI), V(kV))), in_interval(spre, V(kI)),
             PredApp{"Pre_" + r.fn + "_" + p, sub_args(ft.int_formals, true)});
      const OwnTemplate& post = t_.templates[ft.post.at(p)];
      Instance spost;
      spost.lo = post.lo.substitute(sigma);
      spost.hi = post.hi.substitute(sigma);
      spost.o = V(post.own);
      spost.pred = PredApp{"Post_" + r.fn + "_" + p, sub_args(ft.int_formals, true)};
      spost.vars = term_vars({&spost.lo, &spost.hi});
      for (const auto& v : spost.pred->vars())
        if (v != kI && v != kV) spost.vars.insert(v);
      for (auto it = spost.vars.begin(); it != spost.vars.end();)
        it = t_.unknowns.count(*it) ? spost.vars.erase(it) : std::next(it);
      after.emplace_back(uname(c, y), add_instance(std::move(spost)));
    }
    for (const auto& [u, k] : after) c.ptrs[u] = k;
    std::vector<Term> rargs = sub_args(ft.int_formals, false);
    std::string u = bind_int_free(c, x);
    rargs.back() = V(u);
    add_fact(c, PredApp{"Ret_" + r.fn, rargs});
  }

  // Ownership still held by main when the program ends.
  void exit_main(Ctx& c) {
    std::vector<std::pair<std::string, int>> live(c.ptrs.begin(), c.ptrs.end());
    for (const auto& [p, k] : live) {
      std::string src = p;
      for (const auto& [s, u] : c.names)
        if (u == p) src = s;
      int j = fresh(c, src, "exit");
      const Instance& b = inst_[k];
      const Instance& x = inst_[j];
      constrain(c, 'a', "exit of main (" + src + ")", covers(b, x),
                Formula::conj({eq(b.lo, x.lo), eq(b.hi, x.hi), eq(b.o, x.o)}));
      clause(c, "exit", opt(at(b, V(kI), V(kV))), in_interval(x, V(kI)), x.pred);
    }
  }

  std::vector<Leaf> sub(Ctx c, const Expr& e) {
    const std::string& w = e.x;
    Ctx inner = c;
    inner.scope_vars = std::set<std::string>(c.free.begin(), c.free.end());
    std::vector<Leaf> leaves = walk(e.rhs.sub, std::move(inner));
    std::set<std::string> outer(c.free.begin(), c.free.end());
    for (auto& [p, k] : c.ptrs) {
      std::set<int> ids;
      for (const auto& l : leaves) ids.insert(l.ctx.ptrs.at(p));
      const Instance& only = inst_[*ids.begin()];
      bool visible = std::all_of(only.vars.begin(), only.vars.end(), [&](const std::string& v) { return outer.count(v); });
      if (ids.size() == 1 && visible) {
        k = *ids.begin();
        continue;
      }
      std::string src = p;
      for (const auto& [s, u] : c.names)
        if (u == p) src = s;
      int j = fresh(c, src, "join");
      for (const auto& l : leaves) {
        const Instance& b = inst_[l.ctx.ptrs.at(p)];
        constrain(l.ctx, 'a', "join of " + w + " (" + src + ")", covers(b, inst_[j]));
        clause(l.ctx, "join", opt(at(b, V(kI), V(kV))), in_interval(inst_[j], V(kI)), inst_[j].pred);
      }
      k = j;
    }
    if (is_ptr(c.fn, w)) throw Unsupported("reference-valued block bound to '" + w + "'");
    bool single = leaves.size() == 1 && leaves[0].value;
    if (single)
      for (const auto& v : leaves[0].value->vars()) single &= outer.count(v) > 0;
    if (single) {
      bind_int_def(c, w, *leaves[0].value);
    } else {
      std::string dname = "D" + std::to_string(dcount_++) + (c.fn.empty() ? "" : "_" + c.fn);
      declare(dname, c.free, false, "join-value");
      PredApp head{dname, arg_terms(c.free, false)};
      for (const auto& l : leaves) {
        if (!l.value) throw Unsupported("reference-valued block bound to '" + w + "'");
        clause(l.ctx, "join-value", {}, Formula::top(), head.substitute({{kV, *l.value}}));
      }
      std::string u = bind_int_free(c, w);
      add_fact(c, head.substitute({{kV, V(u)}}));
    }
    return walk(e.body, std::move(c));
  }
};

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string s;
  for (size_t k = 0; k < xs.size(); ++k) s += (k ? sep : "") + xs[k];
  return s;
}

}  // namespace

// ---------------------------------------------------------------- tables

std::string OwnTemplate::to_string() const {
  return (fn.empty() ? std::string("<main>") : fn) + "." + var + " @" + site + " #" + std::to_string(id) + ": [" +
         lo.to_string() + ", " + hi.to_string() + "] -> " + own;
}

std::string OwnConstraint::to_string() const {
  std::string s = std::string("(") + schema + ") ";
  if (!universals.empty()) s += "forall " + join(universals, " ") + ". ";
  if (!guard.is_true()) s += guard.to_string() + " => ";
  return s + body.to_string();
}

std::vector<const OwnTemplate*> TemplateTable::of(const std::string& fn, const std::string& var) const {
  std::vector<const OwnTemplate*> out;
  for (const auto& t : templates)
    if (t.fn == fn && t.var == var) out.push_back(&t);
  return out;
}

TemplateTable gen_templates(const Program& p, const SimpleTypeTable& st) { return Walker(p, st).run(); }

std::optional<Formula> collect_path_condition(const Program& p, const SimpleTypeTable& st, const std::string& fn,
                                              const std::string& marker_var) {
  Walker w(p, st);
  w.run();
  for (const auto& [f, phi, path] : w.assert_paths)
    if (f == fn && phi.free_vars().count(marker_var)) return path;
  return std::nullopt;
}

std::vector<OwnConstraint> gen_own_constraints(const TemplateTable& t, const std::map<std::string, Formula>& invariants) {
  std::vector<OwnConstraint> out = t.constraints;
  for (auto& c : out) {
    auto it = invariants.find(c.fn);
    if (it == invariants.end() || it->second.is_true()) continue;
    c.guard = and_all({it->second, c.guard});
    std::set<std::string> u(c.universals.begin(), c.universals.end());
    for (const auto& v : it->second.free_vars()) u.insert(v);
    c.universals.assign(u.begin(), u.end());
  }
  return out;
}

// ---------------------------------------------------------------- invariants

std::map<std::string, Formula> infer_param_invariants(const TemplateTable& t, const SolverConfig& cfg) {
  std::map<std::string, std::vector<Formula>> cands;
  for (const auto& [fn, ft] : t.funs) {
    auto& cs = cands[fn];
    for (const auto& x : ft.int_formals) {
      cs.push_back(ge(V(x), Term(0)));
      cs.push_back(ge(V(x), Term(1)));
    }
    for (const auto& x : ft.int_formals)
      for (const auto& y : ft.int_formals)
        if (x != y) cs.push_back(ge(V(x), V(y)));
  }
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<Formula> queries;
    std::vector<std::pair<std::string, size_t>> owners;
    for (const auto& s : t.calls) {
      auto it = cands.find(s.callee);
      if (it == cands.end()) continue;
      Formula hyp = s.guard;
      if (auto ci = cands.find(s.caller); ci != cands.end()) hyp = and_all({and_all(ci->second), hyp});
      for (size_t k = 0; k < it->second.size(); ++k) {
        queries.push_back(Formula::conj(hyp, Formula::negate(it->second[k].substitute(s.actuals))));
        owners.emplace_back(s.callee, k);
      }
    }
    if (queries.empty()) break;
    auto res = check_sat_batch(queries, {}, cfg);
    std::map<std::string, std::set<size_t>> drop;
    for (size_t q = 0; q < queries.size(); ++q)
      if (q >= res.size() || res[q].kind != SolverVerdict::Kind::Unsat) drop[owners[q].first].insert(owners[q].second);
    for (const auto& [fn, ks] : drop) {
      std::vector<Formula> keep;
      for (size_t k = 0; k < cands[fn].size(); ++k)
        if (!ks.count(k)) keep.push_back(cands[fn][k]);
      cands[fn] = std::move(keep);
      changed = true;
    }
  }
  std::map<std::string, Formula> out;
  for (const auto& [fn, cs] : cands)
    if (!cs.empty()) out[fn] = and_all(cs);
  return out;
}

// ---------------------------------------------------------------- solving

Term OwnSolution::eval(const Term& t) const {
  std::map<std::string, Term> sub;
  for (const auto& v : t.vars())
    if (auto it = values.find(v); it != values.end()) sub[v] = Term(it->second);
  return t.substitute(sub);
}

Formula OwnSolution::eval(const Formula& f) const {
  std::map<std::string, Term> sub;
  for (const auto& v : f.free_vars())
    if (auto it = values.find(v); it != values.end()) sub[v] = Term(it->second);
  return f.substitute(sub);
}

namespace {

BigInt trunc_div(const BigInt& a, const BigInt& b) { return a / b; }  // cpp_int truncates toward zero

// Fills every derived variable reachable from `val`.
bool complete_derived(Valuation& val, const std::map<std::string, Derived>& derived) {
  for (bool progress = true; progress;) {
    progress = false;
    for (const auto& [v, d] : derived) {
      if (val.count(v)) continue;
      bool ready = true;
      for (const auto& u : d.num.vars()) ready &= val.count(u) > 0;
      if (!ready) continue;
      Rational n = d.num.evaluate(val);
      if (denominator(n) != 1) return false;
      val[v] = Rational(trunc_div(numerator(n), d.div));
      progress = true;
    }
  }
  return true;
}

std::map<std::string, Term> as_sub(const Valuation& v) {
  std::map<std::string, Term> s;
  for (const auto& [k, x] : v) s[k] = Term(x);
  return s;
}

Formula domain_of(const SortMap& unknowns, int coeff_bound) {
  std::vector<Formula> parts;
  for (const auto& [v, s] : unknowns) {
    if (s == Sort::Real) {
      parts.push_back(ge(V(v), Term(0)));
      parts.push_back(le(V(v), Term(1)));
    } else if (coeff_bound > 0 && v.find('_') != std::string::npos && v.substr(v.rfind('_') + 1) != "0") {
      parts.push_back(ge(V(v), Term(-coeff_bound)));
      parts.push_back(le(V(v), Term(coeff_bound)));
    }
  }
  return and_all(parts);
}

}  // namespace

std::optional<Valuation> sample_point(const OwnConstraint& c, std::mt19937_64& rng, int lo, int hi, int attempts) {
  std::uniform_int_distribution<int> dist(lo, hi);
  std::set<std::string> need(c.universals.begin(), c.universals.end());
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [v, d] : c.derived)
      if (need.count(v))
        for (const auto& u : d.num.vars()) grew |= need.insert(u).second;
  }
  for (int a = 0; a < attempts; ++a) {
    Valuation val;
    for (const auto& v : need)
      if (!c.derived.count(v)) val[v] = dist(rng);
    if (!complete_derived(val, c.derived)) continue;
    if (c.guard.evaluate(val)) {
      Valuation out;
      for (const auto& v : c.universals) out[v] = val.at(v);
      return out;
    }
  }
  return std::nullopt;
}

namespace {

OwnResult cegis(const std::vector<OwnConstraint>& cs, const SortMap& unknowns, const SolveParams& params,
                const SolverConfig& cfg) {
  std::mt19937_64 rng(params.seed);
  std::vector<std::vector<Valuation>> points(cs.size());
  std::vector<bool> vacuous(cs.size(), false);
  Formula domain = domain_of(unknowns, params.coeff_bound);
  OwnResult res;

  // Guards that rejection sampling cannot hit are asked of the solver once.
  std::vector<size_t> hard;
  for (size_t k = 0; k < cs.size(); ++k)
    if (!cs[k].universals.empty() && !sample_point(cs[k], rng, params.sample_lo, params.sample_hi, 256))
      hard.push_back(k);
  if (!hard.empty()) {
    std::vector<Formula> qs;
    for (size_t k : hard) qs.push_back(cs[k].guard);
    auto r = check_sat_batch(qs, {}, cfg);
    for (size_t j = 0; j < hard.size(); ++j) {
      if (j < r.size() && r[j].kind == SolverVerdict::Kind::Unsat) {
        vacuous[hard[j]] = true;
      } else if (j < r.size() && r[j].kind == SolverVerdict::Kind::Sat) {
        Valuation v;
        for (const auto& u : cs[hard[j]].universals) v[u] = r[j].model.count(u) ? r[j].model.at(u) : Rational(0);
        if (cs[hard[j]].guard.evaluate(v)) points[hard[j]].push_back(v);
      }
    }
  }

  // Fresh samples go only to constraints whose last verification failed.
  std::vector<bool> refine(cs.size(), true);
  auto add_point = [&](size_t k, Valuation v) {
    if (std::find(points[k].begin(), points[k].end(), v) == points[k].end()) points[k].push_back(std::move(v));
  };
  for (int round = 1; round <= params.max_rounds; ++round) {
    res.rounds = round;
    std::vector<Formula> inst{domain};
    for (size_t k = 0; k < cs.size(); ++k) {
      const OwnConstraint& c = cs[k];
      if (vacuous[k]) continue;
      if (c.universals.empty()) {
        if (c.guard.evaluate({})) inst.push_back(c.body);
        continue;
      }
      if (refine[k])
        for (int s = 0; s < params.samples_per_round; ++s)
          if (auto p = sample_point(c, rng, params.sample_lo, params.sample_hi, 256)) add_point(k, std::move(*p));
      for (const auto& p : points[k]) inst.push_back(c.body.substitute(as_sub(p)));
    }
    SatResult sat = check_sat_qf(and_all(inst), unknowns, cfg);
    if (sat.kind == SolverVerdict::Kind::Error) throw SolverError("ownership solver: " + sat.diagnostic);
    if (sat.kind == SolverVerdict::Kind::Unsat) {
      res.reason = "ownership constraints unsatisfiable on sampled points";
      return res;
    }
    if (sat.kind == SolverVerdict::Kind::Unknown) {
      res.reason = "solver returned unknown on sampled points" + (sat.diagnostic.empty() ? "" : ": " + sat.diagnostic);
      return res;
    }
    OwnSolution cand;
    for (const auto& [v, s] : unknowns) cand.values[v] = sat.model.count(v) ? sat.model.at(v) : Rational(0);

    std::vector<Formula> checks;
    std::vector<size_t> which;
    bool ground_ok = true;
    for (size_t k = 0; k < cs.size(); ++k) {
      if (vacuous[k]) continue;
      Formula body = cand.eval(cs[k].body);
      if (cs[k].universals.empty()) {
        ground_ok &= !cs[k].guard.evaluate({}) || body.evaluate({});
        continue;
      }
      checks.push_back(Formula::conj(cs[k].guard, Formula::negate(body)));
      which.push_back(k);
    }
    if (!ground_ok) throw SolverError("ownership solver returned a model violating a ground constraint");
    auto verdicts = check_sat_batch(checks, {}, cfg);
    bool all_valid = true;
    std::fill(refine.begin(), refine.end(), false);
    for (size_t j = 0; j < which.size(); ++j) {
      const auto& v = verdicts[j];
      if (v.kind == SolverVerdict::Kind::Unsat) continue;
      all_valid = false;
      refine[which[j]] = true;
      if (v.kind != SolverVerdict::Kind::Sat) continue;
      Valuation cex;
      for (const auto& u : cs[which[j]].universals) cex[u] = v.model.count(u) ? v.model.at(u) : Rational(0);
      add_point(which[j], std::move(cex));
    }
    if (all_valid) {
      res.kind = OwnResult::Kind::Solved;
      res.solution = std::move(cand);
      return res;
    }
  }
  res.reason = "round budget exhausted";
  return res;
}

}  // namespace

OwnResult solve_exists_forall(const std::vector<OwnConstraint>& cs, const SortMap& unknowns, const SolveParams& params,
                              const SolverConfig& cfg) {
  bool any = std::any_of(cs.begin(), cs.end(), [](const OwnConstraint& c) { return c.preferred.has_value(); });
  if (params.prefer && any) {
    std::vector<OwnConstraint> strong = cs;
    for (auto& c : strong)
      if (c.preferred) c.body = *c.preferred;
    OwnResult r = cegis(strong, unknowns, params, cfg);
    if (r.kind == OwnResult::Kind::Solved) {
      r.used_preferred = true;
      return r;
    }
  }
  return cegis(cs, unknowns, params, cfg);
}

std::vector<size_t> verify_own_solution(const std::vector<OwnConstraint>& cs, const OwnSolution& sol,
                                        const SolverConfig& cfg) {
  std::vector<size_t> bad;
  for (const auto& [v, x] : sol.values)
    if (v.rfind("$o", 0) == 0 && (x < 0 || x > 1)) bad.push_back(static_cast<size_t>(-1));
  for (size_t k = 0; k < cs.size(); ++k) {
    ValidityObligation ob{cs[k].universals, cs[k].guard, sol.eval(cs[k].body)};
    if (check_valid(ob, cfg).kind != ValidityResult::Kind::Valid) bad.push_back(k);
  }
  return bad;
}

std::string emit_own_smtlib(const std::vector<OwnConstraint>& cs, const SortMap& unknowns) {
  std::ostringstream out;
  out << "(set-logic ALL)\n";
  for (const auto& [v, s] : unknowns)
    out << "(declare-fun " << smt_symbol(v) << " () " << (s == Sort::Real ? "Real" : "Int") << ")\n";
  for (const auto& c : cs) {
    out << "; (" << c.schema << ") " << (c.fn.empty() ? "<main>" : c.fn) << ": " << c.site << "\n";
    Formula f = c.guard.is_true() ? c.body : Formula::implies(c.guard, c.body);
    std::string body = smt_formula(f, unknowns);
    if (c.universals.empty()) {
      out << "(assert " << body << ")\n";
      continue;
    }
    out << "(assert (forall (";
    for (size_t k = 0; k < c.universals.size(); ++k)
      out << (k ? " " : "") << "(" << smt_symbol(c.universals[k]) << " Int)";
    out << ") " << body << "))\n";
  }
  out << "(check-sat)\n";
  return out.str();
}

}  // namespace impverif
