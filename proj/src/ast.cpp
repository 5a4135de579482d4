#include "impverif/ast.hpp"

namespace impverif {

std::string SimpleType::to_string() const {
  std::string s = "int";
  for (int i = 0; i < ref_depth; ++i) s += " ref";
  return s;
}

std::string Operand::to_string() const { return is_var() ? name() : value().str(); }

const char* binop_symbol(BinOpKind k) {
  switch (k) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::Div: return "/";
  }
  return "?";
}

namespace {
std::shared_ptr<Expr> node(Expr::Kind k, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->pos = pos;
  return e;
}
}  // namespace

ExprPtr mk_int(BigInt n, SourcePos pos) {
  auto e = node(Expr::Kind::IntLit, pos);
  e->value = std::move(n);
  return e;
}

ExprPtr mk_var(std::string x, SourcePos pos) {
  auto e = node(Expr::Kind::Var, pos);
  e->x = std::move(x);
  return e;
}

ExprPtr mk_let(std::string x, Rhs rhs, ExprPtr body, SourcePos pos) {
  auto e = node(Expr::Kind::Let, pos);
  e->x = std::move(x);
  e->rhs = std::move(rhs);
  e->body = std::move(body);
  return e;
}

ExprPtr mk_if(Cond c, ExprPtr then_e, ExprPtr else_e, SourcePos pos) {
  auto e = node(Expr::Kind::If, pos);
  e->cond = std::move(c);
  e->body = std::move(then_e);
  e->else_branch = std::move(else_e);
  return e;
}

ExprPtr mk_ifnp(std::string x, ExprPtr then_e, ExprPtr else_e, SourcePos pos) {
  auto e = node(Expr::Kind::IfNp, pos);
  e->x = std::move(x);
  e->body = std::move(then_e);
  e->else_branch = std::move(else_e);
  return e;
}

ExprPtr mk_mkarray(std::string x, BigInt n, ExprPtr body, SourcePos pos) {
  auto e = node(Expr::Kind::MkArray, pos);
  e->x = std::move(x);
  e->value = std::move(n);
  e->body = std::move(body);
  return e;
}

ExprPtr mk_assign(std::string x, Operand src, ExprPtr body, SourcePos pos) {
  auto e = node(Expr::Kind::Assign, pos);
  e->x = std::move(x);
  e->src = std::move(src);
  e->body = std::move(body);
  return e;
}

ExprPtr mk_alias_deref(std::string x, std::string y, ExprPtr body, SourcePos pos) {
  auto e = node(Expr::Kind::AliasDeref, pos);
  e->x = std::move(x);
  e->y = std::move(y);
  e->body = std::move(body);
  return e;
}

ExprPtr mk_alias_addptr(std::string x, std::string y, std::string z, ExprPtr body, bool auto_alias,
                        SourcePos pos) {
  auto e = node(Expr::Kind::AliasAddPtr, pos);
  e->x = std::move(x);
  e->y = std::move(y);
  e->z = std::move(z);
  e->auto_alias = auto_alias;
  e->body = std::move(body);
  return e;
}

ExprPtr mk_assert(Formula phi, ExprPtr body, SourcePos pos) {
  auto e = node(Expr::Kind::Assert, pos);
  e->formula = std::move(phi);
  e->body = std::move(body);
  return e;
}

Rhs rhs_int(BigInt n) {
  Rhs r;
  r.kind = Rhs::Kind::IntLit;
  r.value = std::move(n);
  return r;
}

Rhs rhs_var(std::string y) {
  Rhs r;
  r.kind = Rhs::Kind::Var;
  r.y = std::move(y);
  return r;
}

Rhs rhs_nondet() {
  Rhs r;
  r.kind = Rhs::Kind::Nondet;
  return r;
}

Rhs rhs_binop(BinOpKind op, Operand a, Operand b) {
  Rhs r;
  r.kind = Rhs::Kind::BinOp;
  r.op = op;
  r.a = std::move(a);
  r.b = std::move(b);
  return r;
}

Rhs rhs_neg(Operand a) {
  Rhs r;
  r.kind = Rhs::Kind::Neg;
  r.a = std::move(a);
  return r;
}

Rhs rhs_deref(std::string y) {
  Rhs r;
  r.kind = Rhs::Kind::Deref;
  r.y = std::move(y);
  return r;
}

Rhs rhs_addptr(std::string y, std::string z) {
  Rhs r;
  r.kind = Rhs::Kind::AddPtr;
  r.y = std::move(y);
  r.z = std::move(z);
  return r;
}

Rhs rhs_call(std::string fn, std::vector<Operand> args) {
  Rhs r;
  r.kind = Rhs::Kind::Call;
  r.fn = std::move(fn);
  r.args = std::move(args);
  return r;
}

Rhs rhs_sub(ExprPtr e) {
  Rhs r;
  r.kind = Rhs::Kind::Sub;
  r.sub = std::move(e);
  return r;
}

const Def* Program::find(const std::string& name) const {
  for (const auto& d : defs)
    if (d.name == name) return &d;
  return nullptr;
}

namespace {

bool same_rhs(const Rhs& a, const Rhs& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Rhs::Kind::IntLit: return a.value == b.value;
    case Rhs::Kind::Var:
    case Rhs::Kind::Deref: return a.y == b.y;
    case Rhs::Kind::Nondet: return true;
    case Rhs::Kind::BinOp: return a.op == b.op && a.a == b.a && a.b == b.b;
    case Rhs::Kind::Neg: return a.a == b.a;
    case Rhs::Kind::AddPtr: return a.y == b.y && a.z == b.z;
    case Rhs::Kind::Call: return a.fn == b.fn && a.args == b.args;
    case Rhs::Kind::Sub: return same_expr(a.sub, b.sub);
  }
  return false;
}

bool same_annot(const std::optional<FunAnnot>& a, const std::optional<FunAnnot>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->pre == b->pre && a->post == b->post && a->ret == b->ret;
}

}  // namespace

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::IntLit: return a->value == b->value;
    case Expr::Kind::Var: return a->x == b->x;
    case Expr::Kind::Let: return a->x == b->x && same_rhs(a->rhs, b->rhs) && same_expr(a->body, b->body);
    case Expr::Kind::If:
      return a->cond.a == b->cond.a && a->cond.cmp == b->cond.cmp && a->cond.b == b->cond.b &&
             same_expr(a->body, b->body) && same_expr(a->else_branch, b->else_branch);
    case Expr::Kind::IfNp:
      return a->x == b->x && same_expr(a->body, b->body) && same_expr(a->else_branch, b->else_branch);
    case Expr::Kind::MkArray: return a->x == b->x && a->value == b->value && same_expr(a->body, b->body);
    case Expr::Kind::Assign: return a->x == b->x && a->src == b->src && same_expr(a->body, b->body);
    case Expr::Kind::AliasDeref: return a->x == b->x && a->y == b->y && same_expr(a->body, b->body);
    case Expr::Kind::AliasAddPtr:
      return a->x == b->x && a->y == b->y && a->z == b->z && a->auto_alias == b->auto_alias &&
             same_expr(a->body, b->body);
    case Expr::Kind::Assert: return a->formula == b->formula && same_expr(a->body, b->body);
  }
  return false;
}

bool same_program(const Program& a, const Program& b) {
  if (a.defs.size() != b.defs.size()) return false;
  for (size_t i = 0; i < a.defs.size(); ++i) {
    const Def& x = a.defs[i];
    const Def& y = b.defs[i];
    if (x.name != y.name || x.params != y.params || !same_annot(x.annot, y.annot) || !same_expr(x.body, y.body))
      return false;
  }
  return same_expr(a.main, b.main);
}

bool is_core(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::IntLit:
    case Expr::Kind::Var: return true;
    case Expr::Kind::If: return false;
    case Expr::Kind::IfNp: return is_core(e->body) && is_core(e->else_branch);
    case Expr::Kind::Assign: return e->src.is_var() && is_core(e->body);
    case Expr::Kind::MkArray:
    case Expr::Kind::AliasDeref:
    case Expr::Kind::AliasAddPtr:
    case Expr::Kind::Assert: return is_core(e->body);
    case Expr::Kind::Let: {
      const Rhs& r = e->rhs;
      switch (r.kind) {
        case Rhs::Kind::Neg: return false;
        case Rhs::Kind::BinOp:
          if (!r.a.is_var() || !r.b.is_var()) return false;
          break;
        case Rhs::Kind::Call:
          for (const auto& a : r.args)
            if (!a.is_var()) return false;
          break;
        case Rhs::Kind::Sub:
          if (!is_core(r.sub)) return false;
          break;
        default: break;
      }
      return is_core(e->body);
    }
  }
  return false;
}

bool is_core(const Program& p) {
  for (const auto& d : p.defs)
    if (!is_core(d.body)) return false;
  return is_core(p.main);
}

}  // namespace impverif
