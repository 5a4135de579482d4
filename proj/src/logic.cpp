#include "impverif/logic.hpp"

#include <algorithm>
#include <sstream>

namespace impverif {

// ---------------------------------------------------------------- Term

Term::Term(const Rational& c) {
  if (c != 0) mono_[{}] = c;
}

Term Term::var(const std::string& name, const Rational& coef) {
  Term t;
  t.add({name}, coef);
  return t;
}

void Term::add(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto it = mono_.find(m);
  if (it == mono_.end()) {
    mono_.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == 0) mono_.erase(it);
  }
}

bool Term::is_constant() const { return mono_.empty() || (mono_.size() == 1 && mono_.begin()->first.empty()); }

Rational Term::constant_part() const {
  auto it = mono_.find(Monomial{});
  return it == mono_.end() ? Rational(0) : it->second;
}

Rational Term::coeff(const std::string& name) const {
  auto it = mono_.find(Monomial{name});
  return it == mono_.end() ? Rational(0) : it->second;
}

int Term::degree() const {
  int d = 0;
  for (const auto& [m, c] : mono_) d = std::max(d, static_cast<int>(m.size()));
  return d;
}

std::set<std::string> Term::vars() const {
  std::set<std::string> out;
  for (const auto& [m, c] : mono_) out.insert(m.begin(), m.end());
  return out;
}

bool Term::mentions(const std::string& name) const {
  for (const auto& [m, c] : mono_)
    if (std::find(m.begin(), m.end(), name) != m.end()) return true;
  return false;
}

Term Term::substitute(const std::map<std::string, Term>& sub) const {
  Term out;
  for (const auto& [m, c] : mono_) {
    Term prod(c);
    Monomial rest;
    for (const auto& v : m) {
      auto it = sub.find(v);
      if (it == sub.end()) {
        rest.push_back(v);
      } else {
        prod = prod * it->second;
      }
    }
    if (!rest.empty()) {
      Term r;
      r.add(rest, 1);
      prod = prod * r;
    }
    out += prod;
  }
  return out;
}

Term Term::rename(const std::map<std::string, std::string>& ren) const {
  std::map<std::string, Term> sub;
  for (const auto& [a, b] : ren) sub.emplace(a, Term::var(b));
  return substitute(sub);
}

Rational Term::evaluate(const Valuation& val) const {
  Rational sum = 0;
  for (const auto& [m, c] : mono_) {
    Rational p = c;
    for (const auto& v : m) {
      auto it = val.find(v);
      if (it == val.end()) throw UnboundVariable(v);
      p *= it->second;
    }
    sum += p;
  }
  return sum;
}

Term& Term::operator+=(const Term& o) {
  for (const auto& [m, c] : o.mono_) add(m, c);
  return *this;
}

Term& Term::operator-=(const Term& o) {
  for (const auto& [m, c] : o.mono_) add(m, -c);
  return *this;
}

Term& Term::operator*=(const Rational& k) {
  if (k == 0) {
    mono_.clear();
    return *this;
  }
  for (auto& [m, c] : mono_) c *= k;
  return *this;
}

Term operator*(const Term& a, const Term& b) {
  Term out;
  for (const auto& [ma, ca] : a.mono_) {
    for (const auto& [mb, cb] : b.mono_) {
      Monomial m = ma;
      m.insert(m.end(), mb.begin(), mb.end());
      std::sort(m.begin(), m.end());
      out.add(m, ca * cb);
    }
  }
  return out;
}

std::string rational_to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

std::string Term::to_string() const {
  if (mono_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  // Variables first (map order puts the constant monomial first), constant last.
  auto emit = [&](const Monomial& m, const Rational& c) {
    Rational mag = c < 0 ? Rational(-c) : c;
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (m.empty()) {
      os << rational_to_string(mag);
      return;
    }
    if (mag != 1) os << rational_to_string(mag) << "*";
    for (size_t i = 0; i < m.size(); ++i) os << (i ? "*" : "") << m[i];
  };
  for (const auto& [m, c] : mono_)
    if (!m.empty()) emit(m, c);
  auto it = mono_.find(Monomial{});
  if (it != mono_.end()) emit(it->first, it->second);
  return os.str();
}

// ---------------------------------------------------------------- Cmp

const char* cmp_symbol(Cmp c) {
  switch (c) {
    case Cmp::Eq: return "=";
    case Cmp::Ne: return "!=";
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
  }
  return "?";
}

Cmp negate_cmp(Cmp c) {
  switch (c) {
    case Cmp::Eq: return Cmp::Ne;
    case Cmp::Ne: return Cmp::Eq;
    case Cmp::Lt: return Cmp::Ge;
    case Cmp::Le: return Cmp::Gt;
    case Cmp::Gt: return Cmp::Le;
    case Cmp::Ge: return Cmp::Lt;
  }
  return c;
}

Cmp flip_cmp(Cmp c) {
  switch (c) {
    case Cmp::Lt: return Cmp::Gt;
    case Cmp::Le: return Cmp::Ge;
    case Cmp::Gt: return Cmp::Lt;
    case Cmp::Ge: return Cmp::Le;
    default: return c;
  }
}

bool compare(const Rational& a, Cmp c, const Rational& b) {
  switch (c) {
    case Cmp::Eq: return a == b;
    case Cmp::Ne: return a != b;
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Gt: return a > b;
    case Cmp::Ge: return a >= b;
  }
  return false;
}

// ---------------------------------------------------------------- Formula

struct Formula::Node {
  Kind kind = Kind::True;
  Term lhs, rhs;
  Cmp cmp = Cmp::Eq;
  std::vector<Formula> kids;
};

Formula::Formula() : node_(nullptr) {}

Formula Formula::top() { return Formula(); }

Formula Formula::bottom() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::False;
  return Formula(n);
}

Formula Formula::atom(Term lhs, Cmp cmp, Term rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->cmp = cmp;
  return Formula(n);
}

Formula Formula::negate(Formula f) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->kids.push_back(std::move(f));
  return Formula(n);
}

Formula Formula::conj(std::vector<Formula> fs) {
  if (fs.empty()) return top();
  if (fs.size() == 1) return fs.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->kids = std::move(fs);
  return Formula(n);
}

Formula Formula::disj(std::vector<Formula> fs) {
  if (fs.empty()) return bottom();
  if (fs.size() == 1) return fs.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->kids = std::move(fs);
  return Formula(n);
}

Formula Formula::implies(Formula a, Formula b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Implies;
  n->kids = {std::move(a), std::move(b)};
  return Formula(n);
}

Formula::Kind Formula::kind() const { return node_ ? node_->kind : Kind::True; }

namespace {
const Term kZero;
const std::vector<Formula> kNoKids;
}  // namespace

const Term& Formula::lhs() const { return node_ ? node_->lhs : kZero; }
const Term& Formula::rhs() const { return node_ ? node_->rhs : kZero; }
Cmp Formula::cmp() const { return node_ ? node_->cmp : Cmp::Eq; }
const std::vector<Formula>& Formula::children() const { return node_ ? node_->kids : kNoKids; }

namespace {
template <typename F>
Formula rebuild(const Formula& f, F&& on_atom) {
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: return f;
    case Formula::Kind::Atom: return on_atom(f);
    case Formula::Kind::Not: return Formula::negate(rebuild(f.children()[0], on_atom));
    case Formula::Kind::Implies:
      return Formula::implies(rebuild(f.children()[0], on_atom), rebuild(f.children()[1], on_atom));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.children().size());
      for (const auto& k : f.children()) kids.push_back(rebuild(k, on_atom));
      return f.kind() == Formula::Kind::And ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
  }
  return f;
}
}  // namespace

Formula Formula::substitute(const std::map<std::string, Term>& sub) const {
  if (sub.empty()) return *this;
  return rebuild(*this, [&](const Formula& a) {
    return Formula::atom(a.lhs().substitute(sub), a.cmp(), a.rhs().substitute(sub));
  });
}

Formula Formula::rename(const std::map<std::string, std::string>& ren) const {
  if (ren.empty()) return *this;
  return rebuild(*this,
                 [&](const Formula& a) { return Formula::atom(a.lhs().rename(ren), a.cmp(), a.rhs().rename(ren)); });
}

std::set<std::string> Formula::free_vars() const {
  std::set<std::string> out;
  if (kind() == Kind::Atom) {
    auto l = lhs().vars(), r = rhs().vars();
    out.insert(l.begin(), l.end());
    out.insert(r.begin(), r.end());
  }
  for (const auto& k : children()) {
    auto s = k.free_vars();
    out.insert(s.begin(), s.end());
  }
  return out;
}

bool Formula::evaluate(const Valuation& val) const {
  switch (kind()) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom: return compare(lhs().evaluate(val), cmp(), rhs().evaluate(val));
    case Kind::Not: return !children()[0].evaluate(val);
    case Kind::Implies: return !children()[0].evaluate(val) || children()[1].evaluate(val);
    case Kind::And:
      for (const auto& k : children())
        if (!k.evaluate(val)) return false;
      return true;
    case Kind::Or:
      for (const auto& k : children())
        if (k.evaluate(val)) return true;
      return false;
  }
  return false;
}

Formula Formula::simplified() const {
  switch (kind()) {
    case Kind::True:
    case Kind::False: return *this;
    case Kind::Atom: {
      Term d = lhs() - rhs();
      if (d.is_constant()) return compare(d.constant_part(), cmp(), 0) ? top() : bottom();
      return *this;
    }
    case Kind::Not: {
      Formula k = children()[0].simplified();
      if (k.is_true()) return bottom();
      if (k.is_false()) return top();
      return negate(k);
    }
    case Kind::Implies: {
      Formula a = children()[0].simplified();
      Formula b = children()[1].simplified();
      if (a.is_false() || b.is_true()) return top();
      if (a.is_true()) return b;
      if (b.is_false()) return negate(a).simplified();
      return implies(a, b);
    }
    case Kind::And:
    case Kind::Or: {
      const bool is_and = kind() == Kind::And;
      std::vector<Formula> kids;
      for (const auto& k : children()) {
        Formula s = k.simplified();
        if (is_and ? s.is_true() : s.is_false()) continue;
        if (is_and ? s.is_false() : s.is_true()) return s;
        if (s.kind() == kind()) {
          for (const auto& g : s.children()) kids.push_back(g);
        } else {
          kids.push_back(s);
        }
      }
      return is_and ? conj(std::move(kids)) : disj(std::move(kids));
    }
  }
  return *this;
}

Formula Formula::nnf() const {
  switch (kind()) {
    case Kind::True:
    case Kind::False:
    case Kind::Atom: return *this;
    case Kind::Implies: return disj(negate(children()[0]).nnf(), children()[1].nnf());
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> kids;
      for (const auto& k : children()) kids.push_back(k.nnf());
      return kind() == Kind::And ? conj(std::move(kids)) : disj(std::move(kids));
    }
    case Kind::Not: {
      const Formula& k = children()[0];
      switch (k.kind()) {
        case Kind::True: return bottom();
        case Kind::False: return top();
        case Kind::Atom: return atom(k.lhs(), negate_cmp(k.cmp()), k.rhs());
        case Kind::Not: return k.children()[0].nnf();
        case Kind::Implies: return conj(k.children()[0].nnf(), negate(k.children()[1]).nnf());
        case Kind::And:
        case Kind::Or: {
          std::vector<Formula> kids;
          for (const auto& g : k.children()) kids.push_back(negate(g).nnf());
          return k.kind() == Kind::And ? disj(std::move(kids)) : conj(std::move(kids));
        }
      }
    }
  }
  return *this;
}

namespace {
void render(const Formula& f, std::ostringstream& os, bool nested) {
  switch (f.kind()) {
    case Formula::Kind::True: os << "true"; return;
    case Formula::Kind::False: os << "false"; return;
    case Formula::Kind::Atom:
      os << f.lhs().to_string() << " " << cmp_symbol(f.cmp()) << " " << f.rhs().to_string();
      return;
    case Formula::Kind::Not:
      os << "!(";
      render(f.children()[0], os, false);
      os << ")";
      return;
    case Formula::Kind::Implies:
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      const char* op = f.kind() == Formula::Kind::And ? " && " : f.kind() == Formula::Kind::Or ? " || " : " => ";
      if (nested) os << "(";
      for (size_t i = 0; i < f.children().size(); ++i) {
        if (i) os << op;
        render(f.children()[i], os, true);
      }
      if (nested) os << ")";
      return;
    }
  }
}
}  // namespace

std::string Formula::to_string() const {
  std::ostringstream os;
  render(*this, os, false);
  return os.str();
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.kind() != b.kind()) return false;
  if (a.kind() == Formula::Kind::Atom)
    return a.cmp() == b.cmp() && a.lhs() == b.lhs() && a.rhs() == b.rhs();
  return a.children() == b.children();
}

Formula and_all(const std::vector<Formula>& fs) {
  std::vector<Formula> kids;
  for (const auto& f : fs) {
    if (f.is_true()) continue;
    if (f.is_false()) return Formula::bottom();
    if (f.kind() == Formula::Kind::And) {
      for (const auto& g : f.children()) kids.push_back(g);
    } else {
      kids.push_back(f);
    }
  }
  return Formula::conj(std::move(kids));
}

Formula or_all(const std::vector<Formula>& fs) {
  std::vector<Formula> kids;
  for (const auto& f : fs) {
    if (f.is_false()) continue;
    if (f.is_true()) return Formula::top();
    kids.push_back(f);
  }
  return Formula::disj(std::move(kids));
}

Formula in_range(const Term& lo, const Term& t, const Term& hi) {
  return Formula::conj(Formula::atom(lo, Cmp::Le, t), Formula::atom(t, Cmp::Le, hi));
}

std::string ValidityObligation::to_string() const {
  std::string s = "forall";
  for (const auto& v : scope) s += " " + v;
  return s + ". " + hypothesis.to_string() + " => " + conclusion.to_string();
}

}  // namespace impverif
