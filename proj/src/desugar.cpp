#include "impverif/simple_types.hpp"
#include "impverif/syntax.hpp"

#include <functional>

namespace impverif {

namespace {

/// Wraps a body with a chain of lets introduced while lowering operands.
using Wrap = std::function<ExprPtr(ExprPtr)>;

class Desugarer {
 public:
  Desugarer(SimpleTypeTable& st) : st_(st) {}

  Program run(const Program& p) {
    Program out;
    for (const Def& d : p.defs) {
      fn_ = d.name;
      Def nd = d;
      nd.body = expr(d.body);
      out.defs.push_back(std::move(nd));
    }
    fn_.clear();
    out.main = expr(p.main);
    return out;
  }

 private:
  SimpleTypeTable& st_;
  std::string fn_;
  int counter_ = 0;

  std::string fresh() {
    std::string x = "$" + std::to_string(counter_++);
    st_.set(fn_, x, SimpleType{0});
    return x;
  }

  bool is_ptr(const Operand& o) const { return o.is_var() && st_.var(fn_, o.name()).is_ref(); }

  /// Turns an operand into a variable, let-binding literals. `lets` collects
  /// the bindings in order (outermost first).
  std::string lower(const Operand& o, std::vector<std::pair<std::string, Rhs>>& lets) {
    if (o.is_var()) return o.name();
    std::string t = fresh();
    lets.emplace_back(t, rhs_int(o.value()));
    return t;
  }

  static ExprPtr wrap(const std::vector<std::pair<std::string, Rhs>>& lets, ExprPtr body, SourcePos pos) {
    for (auto it = lets.rbegin(); it != lets.rend(); ++it) body = mk_let(it->first, it->second, body, pos);
    return body;
  }

  ExprPtr expr(const ExprPtr& e) {
    const SourcePos pos = e->pos;
    switch (e->kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::Var: return e;
      case Expr::Kind::Let: return let(e);
      case Expr::Kind::If: return cond(e->cond, e->body, e->else_branch, pos);
      case Expr::Kind::IfNp: return mk_ifnp(e->x, expr(e->body), expr(e->else_branch), pos);
      case Expr::Kind::MkArray: return mk_mkarray(e->x, e->value, expr(e->body), pos);
      case Expr::Kind::Assign: {
        std::vector<std::pair<std::string, Rhs>> lets;
        std::string src = lower(e->src, lets);
        return wrap(lets, mk_assign(e->x, Operand::var(src), expr(e->body), pos), pos);
      }
      case Expr::Kind::AliasDeref: return mk_alias_deref(e->x, e->y, expr(e->body), pos);
      case Expr::Kind::AliasAddPtr: return mk_alias_addptr(e->x, e->y, e->z, expr(e->body), e->auto_alias, pos);
      case Expr::Kind::Assert: return mk_assert(e->formula, expr(e->body), pos);
    }
    return e;
  }

  ExprPtr let(const ExprPtr& e) {
    const SourcePos pos = e->pos;
    const Rhs& r = e->rhs;
    std::vector<std::pair<std::string, Rhs>> lets;
    Rhs out = r;
    switch (r.kind) {
      case Rhs::Kind::IntLit:
      case Rhs::Kind::Var:
      case Rhs::Kind::Nondet:
      case Rhs::Kind::Deref: break;
      case Rhs::Kind::AddPtr:
        if (st_.var(fn_, r.z).is_ref()) throw DesugarError("pointer used as offset of pointer addition", pos);
        break;
      case Rhs::Kind::Sub: out = rhs_sub(expr(r.sub)); break;
      case Rhs::Kind::Neg:
        if (!r.a.is_var()) {
          out = rhs_int(-r.a.value());
        } else {
          if (is_ptr(r.a)) throw DesugarError("pointer under arithmetic negation", pos);
          std::string zero = fresh();
          lets.emplace_back(zero, rhs_int(0));
          out = rhs_binop(BinOpKind::Sub, Operand::var(zero), r.a);
        }
        break;
      case Rhs::Kind::Call: {
        std::vector<Operand> args;
        for (const auto& a : r.args) args.push_back(Operand::var(lower(a, lets)));
        out = rhs_call(r.fn, std::move(args));
        break;
      }
      case Rhs::Kind::BinOp: {
        if (is_ptr(r.b)) throw DesugarError("pointer used as arithmetic operand", pos);
        if (is_ptr(r.a)) {
          if (r.op == BinOpKind::Add) {
            out = rhs_addptr(r.a.name(), lower(r.b, lets));
          } else if (r.op == BinOpKind::Sub) {
            // p - k is p plus the negation of k.
            std::string neg = fresh();
            if (r.b.is_var()) {
              std::string zero = fresh();
              lets.emplace_back(zero, rhs_int(0));
              lets.emplace_back(neg, rhs_binop(BinOpKind::Sub, Operand::var(zero), r.b));
            } else {
              lets.emplace_back(neg, rhs_int(-r.b.value()));
            }
            out = rhs_addptr(r.a.name(), neg);
          } else {
            throw DesugarError(std::string("pointer under operator '") + binop_symbol(r.op) + "'", pos);
          }
        } else {
          std::string a = lower(r.a, lets);
          std::string b = lower(r.b, lets);
          out = rhs_binop(r.op, Operand::var(a), Operand::var(b));
        }
        break;
      }
    }
    return wrap(lets, mk_let(e->x, out, expr(e->body), pos), pos);
  }

  /// `a <= b + k` lowered to a fresh difference fed to ifnp.
  ExprPtr le(const Operand& a, const Operand& b, const BigInt& k, ExprPtr then_e, ExprPtr else_e, SourcePos pos) {
    if (!a.is_var() && !b.is_var()) {
      std::string t = fresh();
      return mk_let(t, rhs_int(a.value() - b.value() - k), mk_ifnp(t, then_e, else_e, pos), pos);
    }
    if (a.is_var() && !b.is_var() && b.value() + k == 0) return mk_ifnp(a.name(), then_e, else_e, pos);
    // Fold the offset into a literal side when there is one.
    Operand a2 = a, b2 = b;
    BigInt k2 = k;
    if (!b.is_var()) {
      b2 = Operand::lit(b.value() + k);
      k2 = 0;
    } else if (!a.is_var()) {
      a2 = Operand::lit(a.value() - k);
      k2 = 0;
    }
    std::vector<std::pair<std::string, Rhs>> lets;
    std::string x = lower(a2, lets);
    std::string y = lower(b2, lets);
    std::string t = fresh();
    lets.emplace_back(t, rhs_binop(BinOpKind::Sub, Operand::var(x), Operand::var(y)));
    if (k2 != 0) {
      std::string c = fresh();
      std::string t2 = fresh();
      lets.emplace_back(c, rhs_int(k2));
      lets.emplace_back(t2, rhs_binop(BinOpKind::Sub, Operand::var(t), Operand::var(c)));
      t = t2;
    }
    return wrap(lets, mk_ifnp(t, then_e, else_e, pos), pos);
  }

  ExprPtr cond(const Cond& c, const ExprPtr& e1, const ExprPtr& e2, SourcePos pos) {
    switch (c.cmp) {
      case Cmp::Le: return le(c.a, c.b, 0, expr(e1), expr(e2), pos);
      case Cmp::Lt: return le(c.a, c.b, -1, expr(e1), expr(e2), pos);
      case Cmp::Ge: return le(c.b, c.a, 0, expr(e1), expr(e2), pos);
      case Cmp::Gt: return le(c.b, c.a, -1, expr(e1), expr(e2), pos);
      case Cmp::Eq:
      case Cmp::Ne: {
        // a = b  iff  a <= b and b <= a; the failing branch is duplicated.
        const ExprPtr& yes = c.cmp == Cmp::Eq ? e1 : e2;
        const ExprPtr& no = c.cmp == Cmp::Eq ? e2 : e1;
        ExprPtr inner = le(c.b, c.a, 0, expr(yes), expr(no), pos);
        return le(c.a, c.b, 0, inner, expr(no), pos);
      }
    }
    return nullptr;
  }
};

int max_fresh(const ExprPtr& e) {
  int m = -1;
  auto name = [&](const std::string& x) {
    if (x.size() > 1 && x[0] == '$') {
      try {
        m = std::max(m, std::stoi(x.substr(1)));
      } catch (...) {
      }
    }
  };
  name(e->x);
  if (e->kind == Expr::Kind::Let && e->rhs.kind == Rhs::Kind::Sub) m = std::max(m, max_fresh(e->rhs.sub));
  if (e->body) m = std::max(m, max_fresh(e->body));
  if (e->else_branch) m = std::max(m, max_fresh(e->else_branch));
  return m;
}

class AliasInserter {
 public:
  explicit AliasInserter(int next) : next_(next) {}

  ExprPtr expr(const ExprPtr& e) {
    const SourcePos pos = e->pos;
    switch (e->kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::Var: return e;
      case Expr::Kind::IfNp: return mk_ifnp(e->x, expr(e->body), expr(e->else_branch), pos);
      case Expr::Kind::If: return mk_if(e->cond, expr(e->body), expr(e->else_branch), pos);
      case Expr::Kind::MkArray: return mk_mkarray(e->x, e->value, expr(e->body), pos);
      case Expr::Kind::Assign: return mk_assign(e->x, e->src, expr(e->body), pos);
      case Expr::Kind::AliasDeref: return mk_alias_deref(e->x, e->y, expr(e->body), pos);
      case Expr::Kind::AliasAddPtr: return mk_alias_addptr(e->x, e->y, e->z, expr(e->body), e->auto_alias, pos);
      case Expr::Kind::Assert: return mk_assert(e->formula, expr(e->body), pos);
      case Expr::Kind::Let: break;
    }
    Rhs r = e->rhs;
    if (r.kind == Rhs::Kind::Sub) r = rhs_sub(expr(r.sub));
    if (r.kind != Rhs::Kind::AddPtr) return mk_let(e->x, r, expr(e->body), pos);

    const ExprPtr& b = e->body;
    bool wrapped = b->kind == Expr::Kind::Let && b->rhs.kind == Rhs::Kind::Sub &&
                   b->body->kind == Expr::Kind::AliasAddPtr && b->body->auto_alias && b->body->x == e->x &&
                   b->body->y == r.y && b->body->z == r.z;
    if (wrapped) {
      ExprPtr inner = mk_let(b->x, rhs_sub(expr(b->rhs.sub)), b->body, b->pos);
      return mk_let(e->x, r, inner, pos);
    }
    std::string w = "$" + std::to_string(next_++);
    ExprPtr alias = mk_alias_addptr(e->x, r.y, r.z, mk_var(w, pos), true, pos);
    return mk_let(e->x, r, mk_let(w, rhs_sub(expr(b)), alias, pos), pos);
  }

 private:
  int next_;
};

}  // namespace

Program desugar(const Program& p, SimpleTypeTable& st) { return Desugarer(st).run(p); }

Program insert_aliases(const Program& p) {
  int m = max_fresh(p.main);
  for (const Def& d : p.defs) m = std::max(m, max_fresh(d.body));
  AliasInserter ins(m + 1);
  Program out;
  for (const Def& d : p.defs) {
    Def nd = d;
    nd.body = ins.expr(d.body);
    out.defs.push_back(std::move(nd));
  }
  out.main = ins.expr(p.main);
  return out;
}

}  // namespace impverif
