// Refinement and ownership types with the algebra used by the typing rules:
// addition, strengthening, typed equality, Empty, context formulas,
// subtyping and well-formedness obligations.
#pragma once

#include "impverif/logic.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace impverif {

/// Reserved binder names; source variables never contain '$'.
inline const std::string kNu = "$nu";
inline const std::string kIdx = "$i";

struct OwnEntry {
  Term lo, hi;
  Rational own;
};

/// Sum of interval entries; an entry with hi < lo contributes nothing.
struct OwnershipFn {
  std::vector<OwnEntry> entries;

  Rational eval(const Rational& i, const Valuation& v) const;
  std::set<std::string> free_vars() const;
  OwnershipFn substitute(const std::map<std::string, Term>& sub) const;
  std::string to_string() const;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScopeError : std::runtime_error {
  explicit ScopeError(const std::string& v) : std::runtime_error("variable '" + v + "' is not in scope"), var(v) {}
  std::string var;
};

class Type {
 public:
  enum class Kind { Int, Ref };

  Type() = default;  // {v | true}
  static Type refined_int(Formula pred, std::string nu = kNu);
  static Type indexed_ref(std::string index, Type elem, OwnershipFn own);
  /// {v | true} or an Empty reference of the given depth.
  static Type empty_of_depth(int ref_depth);

  Kind kind() const { return kind_; }
  bool is_int() const { return kind_ == Kind::Int; }
  const std::string& binder() const { return binder_; }
  const Formula& pred() const { return pred_; }
  const Type& elem() const { return *elem_; }
  const OwnershipFn& own() const { return own_; }
  int depth() const { return is_int() ? 0 : 1 + elem_->depth(); }

  /// Capture-avoiding substitution of free (non-binder) variables.
  Type substitute(const std::map<std::string, Term>& sub) const;
  Type with_binder(const std::string& b) const;
  std::set<std::string> free_vars() const;

  /// "{v: int | phi}" and "(i -> T) ref^{[l,u] -> o, ...}".
  std::string to_string() const;

 private:
  Kind kind_ = Kind::Int;
  std::string binder_ = kNu;
  Formula pred_;
  std::shared_ptr<const Type> elem_;
  OwnershipFn own_;
};

/// Ordered bindings; domain distinct.
class TypeEnv {
 public:
  void bind(const std::string& x, Type t);
  const std::vector<std::pair<std::string, Type>>& bindings() const { return b_; }
  const Type* find(const std::string& x) const;
  std::vector<std::string> int_vars() const;

 private:
  std::vector<std::pair<std::string, Type>> b_;
};

struct FunType {
  std::vector<std::pair<std::string, Type>> pre, post;
  Type ret = Type::refined_int(Formula::top());
};

Type ty_add(const Type& a, const Type& b);
Type strengthen(const Type& t, const std::string& x, const Formula& phi);
Formula typed_eq(const Type& t, const std::string& x, const std::string& y);
std::vector<ValidityObligation> empty_obligations(const Type& t);
Formula ctx_formula(const TypeEnv& env);
std::vector<ValidityObligation> subtype_obligations(const TypeEnv& env, const Type& a, const Type& b);
std::vector<ValidityObligation> equiv_obligations(const TypeEnv& env, const Type& a, const Type& b);
/// Throws ScopeError when a free variable is not an integer binding of env.
std::vector<ValidityObligation> wf_obligations(const TypeEnv& env, const Type& t);

/// Formula for `r1(i) >= r2(i)` at index term i, by case analysis over which
/// entries contain i.
Formula own_dominates(const OwnershipFn& r1, const OwnershipFn& r2, const Term& i);

}  // namespace impverif
