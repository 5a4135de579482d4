#include <doctest.h>

#include "impverif/frontend.hpp"
#include "impverif/interp.hpp"
#include "test_util.hpp"

#include <sstream>

using namespace impverif;

namespace {

Outcome run_text(const std::string& text, std::uint64_t seed = 1, const std::string& init = "random",
                 std::uint64_t fuel = 10'000'000, std::ostream* trace = nullptr) {
  Frontend f = run_frontend(text);
  RunOptions o;
  o.seed = seed;
  o.fuel = fuel;
  o.init = InitPolicy::parse(init);
  o.trace = trace;
  return run(f.core, o);
}

}  // namespace

TEST_CASE("value program halts") {
  Outcome o = run_text("{ 42 }");
  CHECK(o.kind == Outcome::Kind::Halt);
  CHECK(o.value == Value::integer(42));
  CHECK(o.to_string() == "Halt 42");
}

TEST_CASE("ifnp takes then-branch on non-positive") {
  std::ostringstream tr;
  Outcome o = run_text("{ let x = -1 in ifnp x then { 1 } else { 2 } }", 1, "random", 100, &tr);
  CHECK(o.value == Value::integer(1));
  CHECK(tr.str() == "R-LetInt\nR-IfTrue\n");
  CHECK(run_text("{ let x = 0 in ifnp x then { 1 } else { 2 } }").value == Value::integer(1));
  CHECK(run_text("{ let x = 1 in ifnp x then { 1 } else { 2 } }").value == Value::integer(2));
}

TEST_CASE("pointer alias check") {
  const char* ok = "{ let a = alloc 5 in let one = 1 in let y = a ++ one in let three = 3 in let x = a ++ three in "
                   "let z = 2 in alias(x = y + z); 0 }";
  CHECK(run_text(ok).kind == Outcome::Kind::Halt);
  const char* bad = "{ let a = alloc 5 in let b = alloc 5 in let one = 1 in let y = b ++ one in let three = 3 in "
                    "let x = a ++ three in let z = 2 in alias(x = y + z); 0 }";
  Outcome o = run_text(bad);
  CHECK(o.kind == Outcome::Kind::AliasFail);
  CHECK_FALSE(o.auto_alias);
}

TEST_CASE("deref alias check") {
  CHECK(run_text("{ let a = alloc 1 in let b = alloc 1 in a := b; let c = *a in alias(c = *a); 0 }").kind ==
        Outcome::Kind::Halt);
  CHECK(run_text("{ let a = alloc 1 in let b = alloc 1 in a := b; let d = alloc 1 in alias(d = *a); 0 }")
            .kind == Outcome::Kind::AliasFail);
}

TEST_CASE("init example succeeds, shortened call fails under constant init") {
  std::string good = read_file(bench_path("ex_init.imp"));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Outcome o = run_text(good, seed);
    CHECK(o.kind == Outcome::Kind::Halt);
    CHECK(o.value == Value::integer(0));
  }
  std::string bad = read_file(bench_path("mutants/ex_init_short.imp"));
  CHECK(run_text(bad, 0, "constant:1").kind == Outcome::Kind::AssertFail);
  CHECK(run_text(bad, 0, "constant:0").kind == Outcome::Kind::Halt);
}

TEST_CASE("fuel exhaustion") {
  Outcome o = run_text("f(x) { let y = f(x) in y } { let z = 0 in let r = f(z) in r }", 1, "random", 1000);
  CHECK(o.kind == Outcome::Kind::FuelExhausted);
  CHECK(o.steps == 1000);
}

TEST_CASE("stuck configurations") {
  CHECK(run_text("{ let a = 1 in let b = 0 in let c = a / b in c }").kind == Outcome::Kind::Stuck);
  Outcome o = run_text("{ let a = alloc 2 in let b = a + 2 in let c = *b in c }");
  CHECK(o.kind == Outcome::Kind::Stuck);
  CHECK(o.reason.find("outside the heap") != std::string::npos);
  CHECK(run_text("{ let a = alloc 2 in let b = a - 1 in b := 3; 0 }").kind == Outcome::Kind::Stuck);
}

TEST_CASE("integer division truncates toward zero") {
  CHECK(run_text("{ let a = -7 in let b = 2 in let c = a / b in c }").value == Value::integer(-3));
  CHECK(run_text("{ let a = 7 in let b = -2 in let c = a / b in c }").value == Value::integer(-3));
}

TEST_CASE("arbitrary precision integers") {
  Outcome o = run_text("{ let a = 4294967296 in let b = a * a in let c = b * a in c }");
  CHECK(o.value.num == BigInt("79228162514264337593543950336"));
}

TEST_CASE("runs are deterministic per seed") {
  for (const auto& name : benchmark_names()) {
    CAPTURE(name);
    std::string text = read_file(bench_path(name));
    Outcome a = run_text(text, 7), b = run_text(text, 7);
    CHECK(a.kind == b.kind);
    CHECK(a.value == b.value);
    CHECK(a.steps == b.steps);
  }
  std::string nd = "{ let x = _ in x }";
  CHECK(run_text(nd, 3).value == run_text(nd, 3).value);
  CHECK_FALSE(run_text(nd, 3).value == run_text(nd, 4).value);
}

TEST_CASE("assignment changes exactly one heap cell; allocation only extends") {
  Frontend f = run_frontend(read_file(bench_path("init10.imp")));
  Machine m(f.core, 5, InitPolicy{});
  auto snapshot = m.heap();
  while (m.step() == Machine::Status::Running) {
    const auto& h = m.heap();
    std::string rule = m.last_rule();
    if (rule == "R-MkArray") {
      REQUIRE(h.size() == snapshot.size() + 1);
      for (std::size_t b = 0; b < snapshot.size(); ++b) CHECK(h[b] == snapshot[b]);
    } else {
      REQUIRE(h.size() == snapshot.size());
      std::size_t changed = 0;
      for (std::size_t b = 0; b < h.size(); ++b)
        for (std::size_t k = 0; k < h[b].size(); ++k) changed += !(h[b][k] == snapshot[b][k]);
      if (rule == "R-Assign")
        CHECK(changed <= 1);
      else
        CHECK(changed == 0);
    }
    snapshot = h;
  }
  CHECK(m.outcome().kind == Outcome::Kind::Halt);
}

TEST_CASE("alias insertion preserves outcomes") {
  for (const auto& name : benchmark_names()) {
    CAPTURE(name);
    std::string text = read_file(bench_path(name));
    RunOptions o;
    o.seed = 11;
    Outcome with = run(run_frontend(text, true).core, o);
    Outcome without = run(run_frontend(text, false).core, o);
    CHECK(with.kind == Outcome::Kind::Halt);
    CHECK(with.kind == without.kind);
    CHECK(with.value == without.value);
  }
}

TEST_CASE("nested pointer program runs") {
  Outcome o = run_text(read_file(bench_path("limits/init_matrix.imp")));
  CHECK(o.kind == Outcome::Kind::Halt);
}
