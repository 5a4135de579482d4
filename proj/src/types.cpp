#include "impverif/types.hpp"

#include <algorithm>

namespace impverif {

namespace {

std::string fresh_name(std::string base, const std::set<std::string>& avoid) {
  while (avoid.count(base)) base += "'";
  return base;
}

std::set<std::string> replacement_vars(const std::map<std::string, Term>& sub) {
  std::set<std::string> out;
  for (const auto& [k, t] : sub)
    for (const auto& v : t.vars()) out.insert(v);
  return out;
}

std::vector<std::string> sorted_scope(const Formula& a, const Formula& b, const std::vector<std::string>& extra = {}) {
  std::set<std::string> s = a.free_vars();
  for (const auto& v : b.free_vars()) s.insert(v);
  s.insert(extra.begin(), extra.end());
  return {s.begin(), s.end()};
}

ValidityObligation make_ob(Formula hyp, Formula concl, const std::vector<std::string>& extra = {}) {
  auto scope = sorted_scope(hyp, concl, extra);
  return {std::move(scope), std::move(hyp), std::move(concl)};
}

void check_same_shape(const Type& a, const Type& b) {
  if (a.kind() != b.kind() || a.depth() != b.depth())
    throw ShapeError("shape mismatch: " + a.to_string() + " vs " + b.to_string());
}

}  // namespace

// ---------------------------------------------------------------- OwnershipFn

Rational OwnershipFn::eval(const Rational& i, const Valuation& v) const {
  Rational sum = 0;
  for (const auto& e : entries)
    if (e.lo.evaluate(v) <= i && i <= e.hi.evaluate(v)) sum += e.own;
  return sum;
}

std::set<std::string> OwnershipFn::free_vars() const {
  std::set<std::string> out;
  for (const auto& e : entries) {
    for (const auto& v : e.lo.vars()) out.insert(v);
    for (const auto& v : e.hi.vars()) out.insert(v);
  }
  return out;
}

OwnershipFn OwnershipFn::substitute(const std::map<std::string, Term>& sub) const {
  OwnershipFn r;
  for (const auto& e : entries) r.entries.push_back({e.lo.substitute(sub), e.hi.substitute(sub), e.own});
  return r;
}

std::string OwnershipFn::to_string() const {
  std::string s = "{";
  for (size_t k = 0; k < entries.size(); ++k) {
    if (k) s += ", ";
    s += "[" + entries[k].lo.to_string() + "," + entries[k].hi.to_string() + "] -> " +
         rational_to_string(entries[k].own);
  }
  return s + "}";
}

// ---------------------------------------------------------------- Type

Type Type::refined_int(Formula pred, std::string nu) {
  Type t;
  t.binder_ = std::move(nu);
  t.pred_ = std::move(pred);
  return t;
}

Type Type::indexed_ref(std::string index, Type elem, OwnershipFn own) {
  Type t;
  t.kind_ = Kind::Ref;
  t.binder_ = std::move(index);
  t.elem_ = std::make_shared<const Type>(std::move(elem));
  t.own_ = std::move(own);
  return t;
}

Type Type::empty_of_depth(int ref_depth) {
  if (ref_depth <= 0) return refined_int(Formula::top());
  return indexed_ref(ref_depth == 1 ? kIdx : kIdx + std::to_string(ref_depth), empty_of_depth(ref_depth - 1), {});
}

std::set<std::string> Type::free_vars() const {
  std::set<std::string> out;
  if (is_int()) {
    out = pred_.free_vars();
  } else {
    out = elem_->free_vars();
  }
  out.erase(binder_);
  if (!is_int())
    for (const auto& v : own_.free_vars()) out.insert(v);
  return out;
}

Type Type::with_binder(const std::string& b) const {
  if (b == binder_) return *this;
  std::map<std::string, Term> ren{{binder_, Term::var(b)}};
  if (is_int()) return refined_int(pred_.substitute(ren), b);
  return indexed_ref(b, elem_->substitute(ren), own_);
}

Type Type::substitute(const std::map<std::string, Term>& sub) const {
  if (sub.empty()) return *this;
  std::map<std::string, Term> inner = sub;
  inner.erase(binder_);
  Type t = *this;
  std::set<std::string> rv = replacement_vars(inner);
  if (rv.count(binder_)) {
    std::set<std::string> avoid = rv;
    for (const auto& v : free_vars()) avoid.insert(v);
    for (const auto& [k, _] : inner) avoid.insert(k);
    t = with_binder(fresh_name(binder_, avoid));
  }
  if (t.is_int()) return refined_int(t.pred_.substitute(inner), t.binder_);
  return indexed_ref(t.binder_, t.elem_->substitute(inner), t.own_.substitute(sub));
}

std::string Type::to_string() const {
  auto show = [](const std::string& n) {
    if (n == kNu) return std::string("v");
    if (n.rfind(kIdx, 0) == 0) return "i" + n.substr(kIdx.size());
    return n;
  };
  if (is_int()) {
    std::map<std::string, std::string> ren{{binder_, show(binder_)}};
    return "{" + show(binder_) + ": int | " + pred_.rename(ren).to_string() + "}";
  }
  std::string es = elem_->substitute({{binder_, Term::var(show(binder_))}}).to_string();
  return "(" + show(binder_) + " -> " + es + ") ref^" + own_.to_string();
}

// ---------------------------------------------------------------- TypeEnv

void TypeEnv::bind(const std::string& x, Type t) {
  for (auto& [n, ty] : b_)
    if (n == x) {
      ty = std::move(t);
      return;
    }
  b_.emplace_back(x, std::move(t));
}

const Type* TypeEnv::find(const std::string& x) const {
  for (const auto& [n, ty] : b_)
    if (n == x) return &ty;
  return nullptr;
}

std::vector<std::string> TypeEnv::int_vars() const {
  std::vector<std::string> out;
  for (const auto& [n, ty] : b_)
    if (ty.is_int()) out.push_back(n);
  return out;
}

// ---------------------------------------------------------------- algebra

Type ty_add(const Type& a, const Type& b) {
  check_same_shape(a, b);
  Type bb = b.with_binder(a.binder());
  if (a.is_int()) return Type::refined_int(Formula::conj(a.pred(), bb.pred()), a.binder());
  OwnershipFn own = a.own();
  own.entries.insert(own.entries.end(), bb.own().entries.begin(), bb.own().entries.end());
  return Type::indexed_ref(a.binder(), ty_add(a.elem(), bb.elem()), std::move(own));
}

Type strengthen(const Type& t, const std::string& x, const Formula& phi) {
  if (!t.is_int()) return t;
  Type u = t;
  if (x != t.binder() && phi.free_vars().count(t.binder())) {
    std::set<std::string> avoid = phi.free_vars();
    for (const auto& v : t.free_vars()) avoid.insert(v);
    u = t.with_binder(fresh_name(t.binder(), avoid));
  }
  Formula p = phi.substitute({{x, Term::var(u.binder())}});
  return Type::refined_int(Formula::conj(u.pred(), p), u.binder());
}

Formula typed_eq(const Type& t, const std::string& x, const std::string& y) {
  if (!t.is_int()) return Formula::top();
  return Formula::atom(Term::var(x), Cmp::Eq, Term::var(y));
}

std::vector<ValidityObligation> empty_obligations(const Type& t) {
  std::vector<ValidityObligation> out;
  if (t.is_int()) {
    if (t.pred().kind() != Formula::Kind::True) out.push_back(make_ob(Formula::top(), t.pred(), {t.binder()}));
    return out;
  }
  for (const auto& e : t.own().entries)
    if (e.own != 0) out.push_back(make_ob(Formula::top(), Formula::atom(e.lo, Cmp::Gt, e.hi)));
  for (auto& ob : empty_obligations(t.elem())) {
    ob.scope.push_back(t.binder());
    out.push_back(make_ob(ob.hypothesis, ob.conclusion, ob.scope));
  }
  return out;
}

Formula ctx_formula(const TypeEnv& env) {
  std::vector<Formula> parts;
  for (const auto& [x, t] : env.bindings())
    if (t.is_int()) parts.push_back(t.pred().substitute({{t.binder(), Term::var(x)}}));
  if (parts.empty()) return Formula::top();
  if (parts.size() == 1) return parts[0];
  return Formula::conj(std::move(parts));
}

Formula own_dominates(const OwnershipFn& r1, const OwnershipFn& r2, const Term& i) {
  struct Lit {
    const OwnEntry* e;
    bool left;
  };
  std::vector<Lit> lits;
  for (const auto& e : r1.entries)
    if (e.own != 0) lits.push_back({&e, true});
  for (const auto& e : r2.entries)
    if (e.own != 0) lits.push_back({&e, false});
  if (lits.size() > 20) throw std::runtime_error("ownership function has too many entries to compare");
  std::vector<Formula> bad;
  const size_t n = lits.size();
  for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
    Rational s1 = 0, s2 = 0;
    for (size_t k = 0; k < n; ++k)
      if (mask >> k & 1) (lits[k].left ? s1 : s2) += lits[k].e->own;
    if (s1 >= s2) continue;
    std::vector<Formula> pattern;
    for (size_t k = 0; k < n; ++k) {
      Formula in = in_range(lits[k].e->lo, i, lits[k].e->hi);
      pattern.push_back(mask >> k & 1 ? in : Formula::negate(in));
    }
    bad.push_back(Formula::negate(Formula::conj(std::move(pattern))));
  }
  if (bad.empty()) return Formula::top();
  if (bad.size() == 1) return bad[0];
  return Formula::conj(std::move(bad));
}

std::vector<ValidityObligation> subtype_obligations(const TypeEnv& env, const Type& a, const Type& b) {
  check_same_shape(a, b);
  Formula ctx = ctx_formula(env);
  Type bb = b.with_binder(a.binder());
  std::vector<ValidityObligation> out;
  if (a.is_int()) {
    out.push_back(make_ob(ctx, Formula::implies(a.pred(), bb.pred()), {a.binder()}));
    return out;
  }
  Formula dom = own_dominates(a.own(), bb.own(), Term::var(a.binder()));
  if (!dom.is_true()) out.push_back(make_ob(ctx, dom, {a.binder()}));
  for (auto& ob : subtype_obligations(env, a.elem(), bb.elem())) out.push_back(std::move(ob));
  return out;
}

std::vector<ValidityObligation> equiv_obligations(const TypeEnv& env, const Type& a, const Type& b) {
  auto out = subtype_obligations(env, a, b);
  for (auto& ob : subtype_obligations(env, b, a)) out.push_back(std::move(ob));
  return out;
}

std::vector<ValidityObligation> wf_obligations(const TypeEnv& env, const Type& t) {
  for (const auto& v : t.free_vars()) {
    const Type* b = env.find(v);
    if (!b || !b->is_int()) throw ScopeError(v);
  }
  std::vector<ValidityObligation> out;
  if (t.is_int()) return out;
  std::vector<Formula> outside;
  for (const auto& e : t.own().entries)
    if (e.own != 0) outside.push_back(Formula::negate(in_range(e.lo, Term::var(t.binder()), e.hi)));
  Formula hyp = outside.empty() ? Formula::top() : outside.size() == 1 ? outside[0] : Formula::conj(outside);
  for (const auto& ob : empty_obligations(t.elem())) {
    Formula h = ob.hypothesis.is_true() ? hyp : Formula::conj(hyp, ob.hypothesis);
    out.push_back(make_ob(h, ob.conclusion, ob.scope));
  }
  TypeEnv inner = env;
  inner.bind(t.binder(), Type::refined_int(Formula::top()));
  for (auto& ob : wf_obligations(inner, t.elem())) out.push_back(std::move(ob));
  return out;
}

}  // namespace impverif
