// Small-step reference interpreter for core programs.
//
// A configuration is the register file R, the heap H and the current
// expression. The expression is kept as a focus plus a stack of pending
// `let x = [] in e` frames, which is the evaluation context E made explicit.
// Source variables are bound to freshly allocated register names through an
// explicit substitution, so `[x'/x]e` costs O(1) per step.
#pragma once

#include "impverif/ast.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace impverif {

struct Value {
  enum class Kind { Int, Addr };
  Kind kind = Kind::Int;
  BigInt num;          // integer value, or offset of an address
  std::uint64_t base = 0;

  static Value integer(BigInt n) { return {Kind::Int, std::move(n), 0}; }
  static Value addr(std::uint64_t base, BigInt off) { return {Kind::Addr, std::move(off), base}; }
  bool is_int() const { return kind == Kind::Int; }
  bool is_addr() const { return kind == Kind::Addr; }
  std::string to_string() const;
  friend bool operator==(const Value& a, const Value& b) {
    return a.kind == b.kind && a.num == b.num && (a.kind == Kind::Int || a.base == b.base);
  }
};

struct InitPolicy {
  bool random = true;
  BigInt constant;

  /// "random" or "constant:K".
  static InitPolicy parse(const std::string& s);
  std::string to_string() const;
};

struct Outcome {
  enum class Kind { Halt, AssertFail, AliasFail, Stuck, FuelExhausted };
  Kind kind = Kind::Halt;
  Value value;             // Halt
  std::string reason;      // Stuck
  bool auto_alias = false; // AliasFail raised by an inserted alias
  std::uint64_t steps = 0;

  std::string to_string() const;
};

struct RunOptions {
  std::uint64_t fuel = 10'000'000;
  std::uint64_t seed = 0;
  InitPolicy init;
  std::ostream* trace = nullptr;  // rule names, one per line
};

class Machine {
 public:
  enum class Status { Running, Done };

  Machine(const Program& p, std::uint64_t seed, InitPolicy init);

  /// Fires one reduction rule. Returns Done with the final outcome stored in
  /// outcome() when the configuration is terminal, failed or stuck.
  Status step();
  const Outcome& outcome() const { return outcome_; }
  /// Name of the rule fired by the last successful step.
  const char* last_rule() const { return last_rule_; }
  std::uint64_t steps() const { return steps_; }

  std::size_t register_count() const { return regs_.size(); }
  std::size_t heap_cells() const;
  const std::vector<std::vector<Value>>& heap() const { return heap_; }

 private:
  struct Env;
  using EnvPtr = std::shared_ptr<const Env>;
  struct Env {
    std::string name;
    std::size_t reg;
    EnvPtr next;
  };
  struct Frame {
    std::string x;
    ExprPtr body;
    EnvPtr env;
  };
  struct StuckError {
    std::string reason;
  };

  const Program& prog_;
  std::mt19937_64 rng_;
  InitPolicy init_;
  std::vector<Value> regs_;
  std::vector<std::vector<Value>> heap_;  // base label -> block
  ExprPtr focus_;
  EnvPtr env_;
  std::vector<Frame> frames_;
  Outcome outcome_;
  const char* last_rule_ = "";
  std::uint64_t steps_ = 0;

  std::size_t lookup(const EnvPtr& env, const std::string& x) const;
  const Value& val(const std::string& x) const { return regs_[lookup(env_, x)]; }
  BigInt int_val(const std::string& x) const;
  Value& cell(const Value& addr);
  BigInt draw();
  void bind(const std::string& x, Value v);
  Status finish(Outcome::Kind k);
};

Outcome run(const Program& p, const RunOptions& opts);

}  // namespace impverif
