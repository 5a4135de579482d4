#include "impverif/interp.hpp"

#include <ostream>

namespace impverif {

std::string Value::to_string() const {
  if (is_int()) return num.str();
  return "<a" + std::to_string(base) + ", " + num.str() + ">";
}

InitPolicy InitPolicy::parse(const std::string& s) {
  InitPolicy p;
  if (s == "random") return p;
  const std::string pre = "constant:";
  if (s.rfind(pre, 0) == 0 && s.size() > pre.size()) {
    try {
      p.random = false;
      p.constant = BigInt(s.substr(pre.size()));
      return p;
    } catch (const std::exception&) {
    }
  }
  throw std::invalid_argument("bad init policy '" + s + "' (expected random or constant:K)");
}

std::string InitPolicy::to_string() const { return random ? "random" : "constant:" + constant.str(); }

std::string Outcome::to_string() const {
  switch (kind) {
    case Kind::Halt: return "Halt " + value.to_string();
    case Kind::AssertFail: return "AssertFail";
    case Kind::AliasFail: return auto_alias ? "AliasFail (inserted alias)" : "AliasFail";
    case Kind::Stuck: return "Stuck: " + reason;
    case Kind::FuelExhausted: return "FuelExhausted";
  }
  return "?";
}

Machine::Machine(const Program& p, std::uint64_t seed, InitPolicy init)
    : prog_(p), rng_(seed), init_(std::move(init)), focus_(p.main) {}

std::size_t Machine::heap_cells() const {
  std::size_t n = 0;
  for (const auto& b : heap_) n += b.size();
  return n;
}

std::size_t Machine::lookup(const EnvPtr& env, const std::string& x) const {
  for (const Env* e = env.get(); e; e = e->next.get())
    if (e->name == x) return e->reg;
  throw StuckError{"unbound variable '" + x + "'"};
}

BigInt Machine::int_val(const std::string& x) const {
  const Value& v = val(x);
  if (!v.is_int()) throw StuckError{"pointer '" + x + "' in integer position"};
  return v.num;
}

Value& Machine::cell(const Value& a) {
  if (!a.is_addr()) throw StuckError{"dereference of non-address " + a.to_string()};
  auto& block = heap_.at(a.base);
  if (a.num < 0 || a.num >= block.size()) throw StuckError{"access outside the heap at " + a.to_string()};
  return block[static_cast<std::size_t>(a.num)];
}

BigInt Machine::draw() {
  std::uniform_int_distribution<std::int64_t> d(-(std::int64_t{1} << 31), (std::int64_t{1} << 31) - 1);
  return BigInt(d(rng_));
}

void Machine::bind(const std::string& x, Value v) {
  regs_.push_back(std::move(v));
  env_ = std::make_shared<const Env>(Env{x, regs_.size() - 1, env_});
}

Machine::Status Machine::finish(Outcome::Kind k) {
  outcome_.kind = k;
  outcome_.steps = steps_;
  return Status::Done;
}

Machine::Status Machine::step() {
  try {
    while (true) {
      const Expr& e = *focus_;
      switch (e.kind) {
        case Expr::Kind::IntLit:
        case Expr::Kind::Var: {
          Value v = e.kind == Expr::Kind::IntLit ? Value::integer(e.value) : val(e.x);
          if (frames_.empty()) {
            outcome_.value = v;
            return finish(Outcome::Kind::Halt);
          }
          Frame f = std::move(frames_.back());
          frames_.pop_back();
          env_ = std::move(f.env);
          bind(f.x, std::move(v));
          focus_ = f.body;
          last_rule_ = e.kind == Expr::Kind::IntLit ? "R-LetInt" : "R-LetVar";
          break;
        }
        case Expr::Kind::Let: {
          const Rhs& r = e.rhs;
          switch (r.kind) {
            case Rhs::Kind::Sub:
              // Decompose: let x = E[..] in e; no rule fires yet.
              frames_.push_back({e.x, e.body, env_});
              focus_ = r.sub;
              continue;
            case Rhs::Kind::Call: {
              const Def* d = prog_.find(r.fn);
              if (!d) throw StuckError{"call to undefined function '" + r.fn + "'"};
              if (d->params.size() != r.args.size()) throw StuckError{"arity mismatch calling '" + r.fn + "'"};
              EnvPtr callee;
              for (std::size_t i = 0; i < r.args.size(); ++i) {
                if (!r.args[i].is_var()) throw StuckError{"literal argument in core program"};
                callee = std::make_shared<const Env>(Env{d->params[i], lookup(env_, r.args[i].name()), callee});
              }
              frames_.push_back({e.x, e.body, env_});
              env_ = std::move(callee);
              focus_ = d->body;
              last_rule_ = "R-Call";
              break;
            }
            case Rhs::Kind::IntLit:
              bind(e.x, Value::integer(r.value));
              last_rule_ = "R-LetInt";
              focus_ = e.body;
              break;
            case Rhs::Kind::Var:
              bind(e.x, val(r.y));
              last_rule_ = "R-LetVar";
              focus_ = e.body;
              break;
            case Rhs::Kind::Nondet:
              bind(e.x, Value::integer(draw()));
              last_rule_ = "R-LetNondet";
              focus_ = e.body;
              break;
            case Rhs::Kind::BinOp: {
              if (!r.a.is_var() || !r.b.is_var()) throw StuckError{"literal operand in core program"};
              BigInt a = int_val(r.a.name()), b = int_val(r.b.name()), out;
              switch (r.op) {
                case BinOpKind::Add: out = a + b; break;
                case BinOpKind::Sub: out = a - b; break;
                case BinOpKind::Mul: out = a * b; break;
                case BinOpKind::Div:
                  if (b == 0) throw StuckError{"division by zero"};
                  out = a / b;  // truncates toward zero
                  break;
              }
              bind(e.x, Value::integer(std::move(out)));
              last_rule_ = "R-LetOp";
              focus_ = e.body;
              break;
            }
            case Rhs::Kind::Neg: throw StuckError{"negation in core program"};
            case Rhs::Kind::Deref: {
              Value v = cell(val(r.y));
              bind(e.x, std::move(v));
              last_rule_ = "R-Deref";
              focus_ = e.body;
              break;
            }
            case Rhs::Kind::AddPtr: {
              const Value& y = val(r.y);
              if (!y.is_addr()) throw StuckError{"pointer addition on non-address '" + r.y + "'"};
              Value v = Value::addr(y.base, y.num + int_val(r.z));
              bind(e.x, std::move(v));
              last_rule_ = "R-AddPtr";
              focus_ = e.body;
              break;
            }
          }
          break;
        }
        case Expr::Kind::IfNp: {
          bool le = int_val(e.x) <= 0;
          focus_ = le ? e.body : e.else_branch;
          last_rule_ = le ? "R-IfTrue" : "R-IfFalse";
          break;
        }
        case Expr::Kind::MkArray: {
          if (e.value < 0) throw StuckError{"negative array size"};
          std::vector<Value> block;
          for (BigInt k = 0; k < e.value; ++k) block.push_back(Value::integer(init_.random ? draw() : init_.constant));
          heap_.push_back(std::move(block));
          bind(e.x, Value::addr(heap_.size() - 1, 0));
          last_rule_ = "R-MkArray";
          focus_ = e.body;
          break;
        }
        case Expr::Kind::Assign: {
          if (!e.src.is_var()) throw StuckError{"literal assignment in core program"};
          Value v = val(e.src.name());
          cell(val(e.x)) = std::move(v);
          last_rule_ = "R-Assign";
          focus_ = e.body;
          break;
        }
        case Expr::Kind::AliasDeref: {
          if (!(cell(val(e.y)) == val(e.x))) {
            last_rule_ = "R-AliasDerefFail";
            ++steps_;
            return finish(Outcome::Kind::AliasFail);
          }
          last_rule_ = "R-AliasDeref";
          focus_ = e.body;
          break;
        }
        case Expr::Kind::AliasAddPtr: {
          const Value& x = val(e.x);
          const Value& y = val(e.y);
          if (!x.is_addr() || !y.is_addr()) throw StuckError{"alias between non-addresses"};
          if (x.base != y.base || x.num != y.num + int_val(e.z)) {
            last_rule_ = "R-AliasAddPtrFail";
            outcome_.auto_alias = e.auto_alias;
            ++steps_;
            return finish(Outcome::Kind::AliasFail);
          }
          last_rule_ = "R-AliasAddPtr";
          focus_ = e.body;
          break;
        }
        case Expr::Kind::Assert: {
          Valuation v;
          for (const auto& x : e.formula.free_vars()) v[x] = Rational(int_val(x));
          if (!e.formula.evaluate(v)) {
            last_rule_ = "R-AssertFail";
            ++steps_;
            return finish(Outcome::Kind::AssertFail);
          }
          last_rule_ = "R-Assert";
          focus_ = e.body;
          break;
        }
        case Expr::Kind::If: throw StuckError{"surface conditional in core program"};
      }
      ++steps_;
      return Status::Running;
    }
  } catch (const StuckError& s) {
    outcome_.reason = s.reason;
    return finish(Outcome::Kind::Stuck);
  }
}

Outcome run(const Program& p, const RunOptions& opts) {
  Machine m(p, opts.seed, opts.init);
  while (true) {
    if (m.steps() >= opts.fuel) {
      Outcome o;
      o.kind = Outcome::Kind::FuelExhausted;
      o.steps = m.steps();
      return o;
    }
    Machine::Status s = m.step();
    Outcome::Kind k = m.outcome().kind;
    bool fired = s == Machine::Status::Running || k == Outcome::Kind::AssertFail || k == Outcome::Kind::AliasFail;
    if (opts.trace && fired) *opts.trace << m.last_rule() << "\n";
    if (s == Machine::Status::Done) return m.outcome();
  }
}

}  // namespace impverif
