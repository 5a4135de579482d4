#include "impverif/syntax.hpp"

#include <sstream>

namespace impverif {

namespace {

std::string pad(int n) { return std::string(static_cast<size_t>(n) * 2, ' '); }

std::string binds_text(const std::vector<std::pair<std::string, SimpleType>>& bs) {
  std::string s;
  for (size_t i = 0; i < bs.size(); ++i) {
    if (i) s += ", ";
    s += bs[i].first + ": " + bs[i].second.to_string();
  }
  return s;
}

void print_expr(const ExprPtr& e, int ind, std::ostream& os);

void print_block(const ExprPtr& e, int ind, std::ostream& os) {
  os << "{\n";
  print_expr(e, ind + 1, os);
  os << "\n" << pad(ind) << "}";
}

void print_rhs(const Rhs& r, int ind, std::ostream& os) {
  switch (r.kind) {
    case Rhs::Kind::IntLit: os << r.value; break;
    case Rhs::Kind::Var: os << r.y; break;
    case Rhs::Kind::Nondet: os << "_"; break;
    case Rhs::Kind::BinOp:
      os << r.a.to_string() << " " << binop_symbol(r.op) << " " << r.b.to_string();
      break;
    case Rhs::Kind::Neg: os << "-" << r.a.to_string(); break;
    case Rhs::Kind::Deref: os << "*" << r.y; break;
    case Rhs::Kind::AddPtr: os << r.y << " ++ " << r.z; break;
    case Rhs::Kind::Call: {
      os << r.fn << "(";
      for (size_t i = 0; i < r.args.size(); ++i) os << (i ? ", " : "") << r.args[i].to_string();
      os << ")";
      break;
    }
    case Rhs::Kind::Sub: print_block(r.sub, ind, os); break;
  }
}

void print_expr(const ExprPtr& e, int ind, std::ostream& os) {
  os << pad(ind);
  switch (e->kind) {
    case Expr::Kind::IntLit: os << e->value; return;
    case Expr::Kind::Var: os << e->x; return;
    case Expr::Kind::Let:
      os << "let " << e->x << " = ";
      print_rhs(e->rhs, ind, os);
      os << " in\n";
      break;
    case Expr::Kind::MkArray: os << "let " << e->x << " = mkarray " << e->value << " in\n"; break;
    case Expr::Kind::If:
    case Expr::Kind::IfNp:
      if (e->kind == Expr::Kind::If)
        os << "if " << e->cond.a.to_string() << " " << cmp_symbol(e->cond.cmp) << " " << e->cond.b.to_string();
      else
        os << "ifnp " << e->x;
      os << " then ";
      print_block(e->body, ind, os);
      os << " else ";
      print_block(e->else_branch, ind, os);
      return;
    case Expr::Kind::Assign: os << e->x << " := " << e->src.to_string() << ";\n"; break;
    case Expr::Kind::AliasDeref: os << "alias(" << e->x << " = *" << e->y << ");\n"; break;
    case Expr::Kind::AliasAddPtr:
      os << (e->auto_alias ? "autoalias(" : "alias(") << e->x << " = " << e->y << " + " << e->z << ");\n";
      break;
    case Expr::Kind::Assert: os << "assert(" << e->formula.to_string() << ");\n"; break;
  }
  print_expr(e->body, ind, os);
}

}  // namespace

std::string pretty(const ExprPtr& e, int indent) {
  std::ostringstream os;
  print_expr(e, indent, os);
  return os.str();
}

std::string pretty(const Program& p) {
  std::ostringstream os;
  for (const Def& d : p.defs) {
    os << d.name << "(";
    for (size_t i = 0; i < d.params.size(); ++i) os << (i ? ", " : "") << d.params[i];
    os << ")\n";
    if (d.annot) {
      os << "[ <" << binds_text(d.annot->pre) << "> -> <" << binds_text(d.annot->post);
      os << (d.annot->post.empty() ? "| " : " | ") << d.annot->ret.to_string() << "> ]\n";
    }
    print_block(d.body, 0, os);
    os << "\n\n";
  }
  print_block(p.main, 0, os);
  return os.str();
}

}  // namespace impverif
