// Linear (and bilinear) integer/rational terms and first-order formulas over
// them. Shared by the front end, the type algebra and both inference phases.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace impverif {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

using Valuation = std::map<std::string, Rational>;

struct UnboundVariable : std::runtime_error {
  explicit UnboundVariable(const std::string& v)
      : std::runtime_error("unbound variable '" + v + "'"), name(v) {}
  std::string name;
};

/// A product of variables (sorted, possibly repeated). The empty monomial is
/// the constant 1.
using Monomial = std::vector<std::string>;

/// Polynomial with rational coefficients. In practice terms are linear in
/// program variables, or bilinear (unknown coefficient x program variable)
/// inside ownership templates.
class Term {
 public:
  Term() = default;
  Term(int c) : Term(Rational(c)) {}  // NOLINT
  explicit Term(const Rational& c);
  explicit Term(const BigInt& c) : Term(Rational(c)) {}

  static Term var(const std::string& name, const Rational& coef = 1);

  const std::map<Monomial, Rational>& monomials() const { return mono_; }

  bool is_zero() const { return mono_.empty(); }
  bool is_constant() const;
  Rational constant_part() const;
  /// Coefficient of the degree-one monomial `name`.
  Rational coeff(const std::string& name) const;
  int degree() const;
  std::set<std::string> vars() const;
  bool mentions(const std::string& name) const;

  Term substitute(const std::map<std::string, Term>& sub) const;
  Term rename(const std::map<std::string, std::string>& ren) const;
  /// Throws UnboundVariable when a variable has no value.
  Rational evaluate(const Valuation& val) const;

  Term& operator+=(const Term& o);
  Term& operator-=(const Term& o);
  Term& operator*=(const Rational& k);
  friend Term operator+(Term a, const Term& b) { return a += b; }
  friend Term operator-(Term a, const Term& b) { return a -= b; }
  friend Term operator-(Term a) { return a *= Rational(-1); }
  friend Term operator*(Term a, const Rational& k) { return a *= k; }
  friend Term operator*(const Rational& k, Term a) { return a *= k; }
  friend Term operator*(const Term& a, const Term& b);
  friend bool operator==(const Term& a, const Term& b) { return a.mono_ == b.mono_; }
  friend bool operator<(const Term& a, const Term& b) { return a.mono_ < b.mono_; }

  /// Infix rendering, e.g. "2*x + y - 3".
  std::string to_string() const;

 private:
  void add(const Monomial& m, const Rational& c);
  std::map<Monomial, Rational> mono_;
};

enum class Cmp { Eq, Ne, Lt, Le, Gt, Ge };

const char* cmp_symbol(Cmp c);
Cmp negate_cmp(Cmp c);
Cmp flip_cmp(Cmp c);
bool compare(const Rational& a, Cmp c, const Rational& b);

/// Immutable formula tree. Builders do not simplify, so `conj({top(), top()})`
/// stays a two-child conjunction; `simplified()` folds constants.
class Formula {
 public:
  enum class Kind { True, False, Atom, Not, And, Or, Implies };

  Formula();  // True

  static Formula top();
  static Formula bottom();
  static Formula atom(Term lhs, Cmp cmp, Term rhs);
  static Formula negate(Formula f);
  static Formula conj(std::vector<Formula> fs);
  static Formula disj(std::vector<Formula> fs);
  static Formula implies(Formula a, Formula b);
  static Formula conj(Formula a, Formula b) { return conj(std::vector<Formula>{std::move(a), std::move(b)}); }
  static Formula disj(Formula a, Formula b) { return disj(std::vector<Formula>{std::move(a), std::move(b)}); }

  Kind kind() const;
  const Term& lhs() const;
  const Term& rhs() const;
  Cmp cmp() const;
  const std::vector<Formula>& children() const;

  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }

  Formula substitute(const std::map<std::string, Term>& sub) const;
  Formula rename(const std::map<std::string, std::string>& ren) const;
  std::set<std::string> free_vars() const;
  bool evaluate(const Valuation& val) const;
  /// Constant folding: drops True conjuncts / False disjuncts, evaluates ground atoms.
  Formula simplified() const;
  /// Negation normal form without Implies.
  Formula nnf() const;

  std::string to_string() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Convenience: conjunction that skips literal True and collapses on False.
Formula and_all(const std::vector<Formula>& fs);
Formula or_all(const std::vector<Formula>& fs);

/// `lo <= t && t <= hi`.
Formula in_range(const Term& lo, const Term& t, const Term& hi);

std::string rational_to_string(const Rational& r);

/// Claim: for all integer values of `scope`, hypothesis implies conclusion.
struct ValidityObligation {
  std::vector<std::string> scope;  // sorted
  Formula hypothesis;
  Formula conclusion;

  std::string to_string() const;
};

}  // namespace impverif
