#include "impverif/simple_types.hpp"

#include <set>
#include <sstream>

namespace impverif {

SimpleType SimpleTypeTable::var(const std::string& fn, const std::string& x) const {
  return vars.at(fn).at(x);
}

bool SimpleTypeTable::has(const std::string& fn, const std::string& x) const {
  auto it = vars.find(fn);
  return it != vars.end() && it->second.count(x);
}

std::string SimpleTypeTable::dump() const {
  std::ostringstream os;
  for (const auto& [f, sig] : funs) {
    os << "fun " << f << " : (";
    for (size_t i = 0; i < sig.params.size(); ++i) os << (i ? ", " : "") << sig.params[i].to_string();
    os << ") -> " << sig.ret.to_string() << "\n";
  }
  for (const auto& [f, m] : vars)
    for (const auto& [x, t] : m) os << (f.empty() ? "<main>" : f) << "." << x << " : " << t.to_string() << "\n";
  return os.str();
}

namespace {

class Unifier {
 public:
  int fresh() { return push(Var, -1); }
  int int_t() { return push(Int, -1); }
  int ref_t(int elem) { return push(Ref, elem); }

  int find(int t) {
    while (kind_[t] == Var && link_[t] != -1) {
      if (link_[link_[t]] != -1 && kind_[link_[t]] == Var) link_[t] = link_[link_[t]];
      t = link_[t];
    }
    return t;
  }

  /// Returns an error description on failure.
  std::optional<std::string> unify(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return std::nullopt;
    if (kind_[a] == Var) return bind(a, b);
    if (kind_[b] == Var) return bind(b, a);
    if (kind_[a] != kind_[b]) return "cannot unify " + show(a) + " with " + show(b);
    if (kind_[a] == Ref) return unify(arg_[a], arg_[b]);
    return std::nullopt;
  }

  /// Unconstrained variables default to int.
  SimpleType resolve(int t) {
    SimpleType s;
    t = find(t);
    while (kind_[t] == Ref) {
      ++s.ref_depth;
      t = find(arg_[t]);
    }
    return s;
  }

  int from(SimpleType s) {
    int t = int_t();
    for (int i = 0; i < s.ref_depth; ++i) t = ref_t(t);
    return t;
  }

 private:
  enum K { Var, Int, Ref };
  std::vector<K> kind_;
  std::vector<int> arg_, link_;

  int push(K k, int a) {
    kind_.push_back(k);
    arg_.push_back(a);
    link_.push_back(-1);
    return static_cast<int>(kind_.size()) - 1;
  }

  bool occurs(int v, int t) {
    t = find(t);
    if (t == v) return true;
    return kind_[t] == Ref && occurs(v, arg_[t]);
  }

  std::optional<std::string> bind(int v, int t) {
    if (occurs(v, t)) return "occurs check failed (infinite reference type)";
    link_[v] = t;
    return std::nullopt;
  }

  std::string show(int t) {
    t = find(t);
    if (kind_[t] == Var) return "'a";
    if (kind_[t] == Int) return "int";
    return show(arg_[t]) + " ref";
  }
};

class Inferer {
 public:
  explicit Inferer(const Program& p) : prog_(p) {}

  SimpleTypeTable run() {
    for (const Def& d : prog_.defs) {
      Sig s;
      for (size_t i = 0; i < d.params.size(); ++i) s.params.push_back(u_.fresh());
      s.ret = u_.fresh();
      sigs_[d.name] = s;
    }
    for (const Def& d : prog_.defs) {
      fn_ = d.name;
      std::set<std::string> scope;
      for (size_t i = 0; i < d.params.size(); ++i) {
        unify(binder(d.params[i]), sigs_[d.name].params[i], d.pos);
        scope.insert(d.params[i]);
      }
      unify(sigs_[d.name].ret, expr(d.body, scope), d.body->pos);
    }
    fn_.clear();
    expr(prog_.main, {});

    for (const Def& d : prog_.defs) {
      if (!d.annot) continue;
      const FunAnnot& a = *d.annot;
      auto check_binds = [&](const std::vector<std::pair<std::string, SimpleType>>& bs) {
        if (bs.size() != d.params.size())
          throw TypeError("annotation of '" + d.name + "' lists " + std::to_string(bs.size()) +
                              " parameters, definition has " + std::to_string(d.params.size()),
                          d.pos);
        for (size_t i = 0; i < bs.size(); ++i) {
          if (bs[i].first != d.params[i])
            throw TypeError("annotation of '" + d.name + "' names '" + bs[i].first + "', expected '" +
                                d.params[i] + "'",
                            d.pos);
          if (auto err = u_.unify(sigs_[d.name].params[i], u_.from(bs[i].second)))
            throw TypeError("annotation mismatch for '" + d.name + "' parameter '" + bs[i].first + "': " + *err,
                            d.pos);
        }
      };
      check_binds(a.pre);
      check_binds(a.post);
      if (auto err = u_.unify(sigs_[d.name].ret, u_.from(a.ret)))
        throw TypeError("annotation mismatch for return type of '" + d.name + "': " + *err, d.pos);
    }

    SimpleTypeTable st;
    for (const auto& [f, s] : sigs_) {
      SimpleTypeTable::Sig out;
      for (int t : s.params) out.params.push_back(u_.resolve(t));
      out.ret = u_.resolve(s.ret);
      st.funs[f] = out;
    }
    for (const auto& [f, m] : binders_)
      for (const auto& [x, t] : m) st.set(f, x, u_.resolve(t));
    return st;
  }

 private:
  struct Sig {
    std::vector<int> params;
    int ret = -1;
  };

  const Program& prog_;
  Unifier u_;
  std::map<std::string, Sig> sigs_;
  std::map<std::string, std::map<std::string, int>> binders_;
  std::string fn_;

  int binder(const std::string& x) {
    auto& m = binders_[fn_];
    auto it = m.find(x);
    if (it != m.end()) return it->second;
    int t = u_.fresh();
    m[x] = t;
    return t;
  }

  void unify(int a, int b, SourcePos pos) {
    if (auto err = u_.unify(a, b)) throw TypeError(*err, pos);
  }

  int use(const std::string& x, const std::set<std::string>& scope, SourcePos pos) {
    if (!scope.count(x)) throw TypeError("unbound variable '" + x + "'", pos);
    return binder(x);
  }

  int operand(const Operand& o, const std::set<std::string>& scope, SourcePos pos) {
    return o.is_var() ? use(o.name(), scope, pos) : u_.int_t();
  }

  int rhs(const Rhs& r, const std::set<std::string>& scope, SourcePos pos) {
    switch (r.kind) {
      case Rhs::Kind::IntLit:
      case Rhs::Kind::Nondet: return u_.int_t();
      case Rhs::Kind::Var: return use(r.y, scope, pos);
      case Rhs::Kind::BinOp: {
        int a = operand(r.a, scope, pos);
        int b = operand(r.b, scope, pos);
        unify(b, u_.int_t(), pos);
        // `+` and `-` may be pointer arithmetic when the left operand is a pointer.
        if (r.op == BinOpKind::Mul || r.op == BinOpKind::Div) unify(a, u_.int_t(), pos);
        return a;
      }
      case Rhs::Kind::Neg: {
        unify(operand(r.a, scope, pos), u_.int_t(), pos);
        return u_.int_t();
      }
      case Rhs::Kind::Deref: {
        int elem = u_.fresh();
        unify(use(r.y, scope, pos), u_.ref_t(elem), pos);
        return elem;
      }
      case Rhs::Kind::AddPtr: {
        int y = use(r.y, scope, pos);
        unify(y, u_.ref_t(u_.fresh()), pos);
        unify(use(r.z, scope, pos), u_.int_t(), pos);
        return y;
      }
      case Rhs::Kind::Call: {
        auto it = sigs_.find(r.fn);
        if (it == sigs_.end()) throw TypeError("call to undefined function '" + r.fn + "'", pos);
        const Sig& s = it->second;
        if (s.params.size() != r.args.size())
          throw TypeError("function '" + r.fn + "' expects " + std::to_string(s.params.size()) + " arguments, got " +
                              std::to_string(r.args.size()),
                          pos);
        for (size_t i = 0; i < r.args.size(); ++i) unify(operand(r.args[i], scope, pos), s.params[i], pos);
        return s.ret;
      }
      case Rhs::Kind::Sub: return expr(r.sub, scope);
    }
    return u_.int_t();
  }

  int expr(const ExprPtr& e, std::set<std::string> scope) {
    const SourcePos pos = e->pos;
    switch (e->kind) {
      case Expr::Kind::IntLit: return u_.int_t();
      case Expr::Kind::Var: return use(e->x, scope, pos);
      case Expr::Kind::Let: {
        int t = rhs(e->rhs, scope, pos);
        unify(binder(e->x), t, pos);
        scope.insert(e->x);
        return expr(e->body, std::move(scope));
      }
      case Expr::Kind::MkArray: {
        unify(binder(e->x), u_.ref_t(u_.fresh()), pos);
        scope.insert(e->x);
        return expr(e->body, std::move(scope));
      }
      case Expr::Kind::If:
      case Expr::Kind::IfNp: {
        if (e->kind == Expr::Kind::If) {
          unify(operand(e->cond.a, scope, pos), u_.int_t(), pos);
          unify(operand(e->cond.b, scope, pos), u_.int_t(), pos);
        } else {
          unify(use(e->x, scope, pos), u_.int_t(), pos);
        }
        int t = expr(e->body, scope);
        unify(t, expr(e->else_branch, scope), pos);
        return t;
      }
      case Expr::Kind::Assign: {
        int src = operand(e->src, scope, pos);
        unify(use(e->x, scope, pos), u_.ref_t(src), pos);
        return expr(e->body, std::move(scope));
      }
      case Expr::Kind::AliasDeref: {
        int x = use(e->x, scope, pos);
        unify(use(e->y, scope, pos), u_.ref_t(x), pos);
        return expr(e->body, std::move(scope));
      }
      case Expr::Kind::AliasAddPtr: {
        int x = use(e->x, scope, pos);
        unify(x, u_.ref_t(u_.fresh()), pos);
        unify(use(e->y, scope, pos), x, pos);
        unify(use(e->z, scope, pos), u_.int_t(), pos);
        return expr(e->body, std::move(scope));
      }
      case Expr::Kind::Assert: {
        for (const auto& v : e->formula.free_vars()) unify(use(v, scope, pos), u_.int_t(), pos);
        return expr(e->body, std::move(scope));
      }
    }
    return u_.int_t();
  }
};

}  // namespace

SimpleTypeTable infer_simple(const Program& p) { return Inferer(p).run(); }

}  // namespace impverif
