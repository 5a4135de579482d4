// Abstract syntax of the imperative pointer language, in both its surface form
// (as written in .imp files) and the core form consumed by the interpreter
// and the inference phases. Core is a syntactic subset of surface.
#pragma once

#include "impverif/logic.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace impverif {

struct SourcePos {
  int line = 0;
  int col = 0;
};

/// Ground simple type: `int` followed by `ref_depth` occurrences of `ref`.
struct SimpleType {
  int ref_depth = 0;
  bool is_int() const { return ref_depth == 0; }
  bool is_ref() const { return ref_depth > 0; }
  std::string to_string() const;
  friend bool operator==(SimpleType a, SimpleType b) { return a.ref_depth == b.ref_depth; }
};

/// Variable or integer literal; literals only occur in surface programs.
struct Operand {
  std::variant<std::string, BigInt> v;

  static Operand var(std::string name) { return {std::move(name)}; }
  static Operand lit(BigInt n) { return {std::move(n)}; }
  bool is_var() const { return std::holds_alternative<std::string>(v); }
  const std::string& name() const { return std::get<std::string>(v); }
  const BigInt& value() const { return std::get<BigInt>(v); }
  std::string to_string() const;
  friend bool operator==(const Operand& a, const Operand& b) { return a.v == b.v; }
};

enum class BinOpKind { Add, Sub, Mul, Div };
const char* binop_symbol(BinOpKind k);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Right-hand side of a `let`.
struct Rhs {
  enum class Kind {
    IntLit,  // n
    Var,     // y
    Nondet,  // _
    BinOp,   // a OP b   (core: both operands variables)
    Neg,     // -a       (surface only)
    Deref,   // *y
    AddPtr,  // y ++ z   (core pointer addition)
    Call,    // f(a1, ..., an)
    Sub,     // { e }    nested expression, e.g. produced by alias insertion
  };
  Kind kind = Kind::IntLit;
  BigInt value;
  std::string y, z;
  BinOpKind op = BinOpKind::Add;
  Operand a, b;
  std::string fn;
  std::vector<Operand> args;
  ExprPtr sub;
};

/// Surface comparison `a <cmp> b` used by `if`.
struct Cond {
  Operand a;
  Cmp cmp = Cmp::Le;
  Operand b;
};

struct Expr {
  enum class Kind {
    IntLit,       // n
    Var,          // x
    Let,          // let x = rhs in body
    If,           // if cond then {..} else {..}        (surface only)
    IfNp,         // ifnp x then {..} else {..}
    MkArray,      // let x = mkarray n in body
    Assign,       // x := src; body
    AliasDeref,   // alias(x = *y); body
    AliasAddPtr,  // alias(x = y + z); body
    Assert,       // assert(phi); body
  };
  Kind kind = Kind::IntLit;
  SourcePos pos;
  BigInt value;        // IntLit value, MkArray size
  std::string x, y, z;
  Operand src;         // Assign source
  Rhs rhs;             // Let
  Cond cond;           // If
  Formula formula;     // Assert
  bool auto_alias = false;  // AliasAddPtr inserted by insert_aliases
  ExprPtr body;        // continuation / then-branch for If/IfNp
  ExprPtr else_branch;
};

// Builders. Each returns a fresh immutable node.
ExprPtr mk_int(BigInt n, SourcePos pos = {});
ExprPtr mk_var(std::string x, SourcePos pos = {});
ExprPtr mk_let(std::string x, Rhs rhs, ExprPtr body, SourcePos pos = {});
ExprPtr mk_if(Cond c, ExprPtr then_e, ExprPtr else_e, SourcePos pos = {});
ExprPtr mk_ifnp(std::string x, ExprPtr then_e, ExprPtr else_e, SourcePos pos = {});
ExprPtr mk_mkarray(std::string x, BigInt n, ExprPtr body, SourcePos pos = {});
ExprPtr mk_assign(std::string x, Operand src, ExprPtr body, SourcePos pos = {});
ExprPtr mk_alias_deref(std::string x, std::string y, ExprPtr body, SourcePos pos = {});
ExprPtr mk_alias_addptr(std::string x, std::string y, std::string z, ExprPtr body, bool auto_alias,
                        SourcePos pos = {});
ExprPtr mk_assert(Formula phi, ExprPtr body, SourcePos pos = {});

Rhs rhs_int(BigInt n);
Rhs rhs_var(std::string y);
Rhs rhs_nondet();
Rhs rhs_binop(BinOpKind op, Operand a, Operand b);
Rhs rhs_neg(Operand a);
Rhs rhs_deref(std::string y);
Rhs rhs_addptr(std::string y, std::string z);
Rhs rhs_call(std::string fn, std::vector<Operand> args);
Rhs rhs_sub(ExprPtr e);

struct FunAnnot {
  std::vector<std::pair<std::string, SimpleType>> pre;
  std::vector<std::pair<std::string, SimpleType>> post;
  SimpleType ret;
};

struct Def {
  std::string name;
  std::vector<std::string> params;
  std::optional<FunAnnot> annot;
  ExprPtr body;
  SourcePos pos;
};

struct Program {
  std::vector<Def> defs;
  ExprPtr main;

  const Def* find(const std::string& name) const;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, SourcePos p)
      : std::runtime_error(std::to_string(p.line) + ":" + std::to_string(p.col) + ": " + msg), pos(p) {}
  SourcePos pos;
};

/// Structural equality (positions ignored).
bool same_expr(const ExprPtr& a, const ExprPtr& b);
bool same_program(const Program& a, const Program& b);

/// True iff the expression contains only core constructors with variable operands.
bool is_core(const ExprPtr& e);
bool is_core(const Program& p);

}  // namespace impverif
