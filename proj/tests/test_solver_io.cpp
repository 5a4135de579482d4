#include <doctest.h>

#include "impverif/solver_io.hpp"
#include "impverif/syntax.hpp"
#include "test_util.hpp"

#include <chrono>
#include <filesystem>
#include <random>

using namespace impverif;

namespace {

SolverConfig builtin() {
  SolverConfig c;
  c.smt_cmd = "builtin";
  return c;
}

SolverConfig z3cfg() {
  SolverConfig c;
  c.smt_cmd = "z3";
  c.chc_cmd = "z3";
  c.timeout_secs = 60;
  return c;
}

ValidityObligation ob(std::vector<std::string> scope, const std::string& hyp, const std::string& concl) {
  return {std::move(scope), parse_formula(hyp), parse_formula(concl)};
}

}  // namespace

TEST_CASE("number and symbol printing") {
  CHECK(smt_number(Rational(-3)) == "(- 3)");
  CHECK(smt_number(Rational(1, 2)) == "(/ 1 2)");
  CHECK(smt_number(Rational(-1, 2)) == "(/ (- 1) 2)");
  CHECK(smt_symbol("p'") == "|p'|");
  CHECK(smt_symbol("$3") == "$3");
  CHECK(smt_symbol("x_1") == "x_1");
}

TEST_CASE("mixed sort atoms coerce integers") {
  SortMap s{{"o", Sort::Real}, {"x", Sort::Int}};
  Formula f = Formula::atom(Term::var("o"), Cmp::Ge, Term::var("x"));
  CHECK(smt_formula(f, s) == "(>= o (to_real x))");
  Formula g = Formula::atom(Term::var("x") * Rational(2), Cmp::Ne, Term(-1));
  CHECK(smt_formula(g, s) == "(not (= (* 2 x) (- 1)))");
  CHECK(smt_declarations(s) == "(declare-fun o () Real)\n(declare-fun x () Int)\n");
}

TEST_CASE("builtin validity checks") {
  CHECK(check_valid(ob({}, "true", "true"), builtin()).kind == ValidityResult::Kind::Valid);
  ValidityResult r = check_valid(ob({"x"}, "true", "x > 0"), builtin());
  REQUIRE(r.kind == ValidityResult::Kind::Invalid);
  CHECK(r.counterexample.at("x") <= 0);
  CHECK(check_valid(ob({"x", "v"}, "x = 1", "v = x => v > 0"), builtin()).kind == ValidityResult::Kind::Unknown);
  CHECK(check_valid(ob({"x"}, "x >= 3 && x <= 3", "2*x = 6"), builtin()).kind == ValidityResult::Kind::Valid);
}

TEST_CASE("builtin qf satisfiability over reals") {
  SortMap s{{"o", Sort::Real}};
  SatResult a = check_sat_qf(parse_formula("o = 1 && o <= 1"), s, builtin());
  REQUIRE(a.kind == SolverVerdict::Kind::Sat);
  CHECK(a.model.at("o") == 1);
  CHECK(check_sat_qf(parse_formula("o > 1 && o <= 1"), s, builtin()).kind == SolverVerdict::Kind::Unsat);
  SatResult b = check_sat_qf(parse_formula("2*o > 1 && o < 1"), s, builtin());
  REQUIRE(b.kind == SolverVerdict::Kind::Sat);
  CHECK(b.model.at("o") > Rational(1, 2));
}

TEST_CASE("builtin solver agrees with brute force on one integer variable") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> coef(-4, 4), cst(-10, 10), pick(0, 5);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<Formula> atoms;
    for (int k = 0; k < 3; ++k)
      atoms.push_back(Formula::atom(Term::var("x") * Rational(coef(rng)), static_cast<Cmp>(pick(rng)),
                                    Term(cst(rng))));
    Formula f = Formula::disj(Formula::conj(atoms[0], atoms[1]), Formula::negate(atoms[2]));
    bool brute = false;
    for (int x = -200; x <= 200 && !brute; ++x) brute = f.evaluate({{"x", x}});
    SatResult r = mini_solve(f, {{"x", Sort::Int}});
    CHECK(r.kind == (brute ? SolverVerdict::Kind::Sat : SolverVerdict::Kind::Unsat));
    if (r.kind == SolverVerdict::Kind::Sat) CHECK(f.evaluate(r.model));
  }
}

TEST_CASE("model parsing") {
  Model m = parse_model("(\n  (define-fun o () Real\n    (/ 1.0 3.0))\n  (define-fun x () Int\n    (- 3))\n)");
  CHECK(m.at("o") == Rational(1, 3));
  CHECK(m.at("x") == -3);
  Model n = parse_model("(model (define-fun |p'| () Int 7) (define-fun f ((a Int)) Bool true))");
  CHECK(n.at("p'") == 7);
  CHECK(n.size() == 1);
  CHECK(parse_model("").empty());
}

TEST_CASE("verdict parsing is total") {
  auto kind = [](const std::string& out, int code) {
    ProcessResult r;
    r.out = out;
    r.exit_code = code;
    return parse_verdict(r).kind;
  };
  CHECK(kind("sat\n(model)\n", 0) == SolverVerdict::Kind::Sat);
  CHECK(kind("\nunsat\n", 0) == SolverVerdict::Kind::Unsat);
  CHECK(kind("unknown\n", 0) == SolverVerdict::Kind::Unknown);
  CHECK(kind("", 1) == SolverVerdict::Kind::Error);
  CHECK(kind("(error \"boom\")\n", 1) == SolverVerdict::Kind::Error);
  CHECK(kind("garbage", 0) == SolverVerdict::Kind::Unknown);
  std::mt19937 rng(9);
  for (int k = 0; k < 200; ++k) {
    std::string s;
    for (int j = 0; j < 20; ++j) s += static_cast<char>(rng() % 128);
    auto v = kind(s, static_cast<int>(rng() % 3));
    CHECK((v == SolverVerdict::Kind::Sat || v == SolverVerdict::Kind::Unsat || v == SolverVerdict::Kind::Unknown ||
           v == SolverVerdict::Kind::Error));
  }
}

TEST_CASE("timeout kills the solver") {
  SolverConfig c;
  c.chc_cmd = "sh " + std::string(IMPVERIF_TEST_DATA) + "/sleep_solver.sh";
  c.timeout_secs = 1;
  auto t0 = std::chrono::steady_clock::now();
  SolverVerdict v = run_horn("(set-logic HORN)\n(check-sat)\n", c);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(v.kind == SolverVerdict::Kind::Unknown);
  CHECK(v.diagnostic == "timeout");
  CHECK(secs < 10);
}

TEST_CASE("scratch files are kept on request") {
  SolverConfig c;
  c.scratch_dir = std::filesystem::temp_directory_path() / "impverif-scratch-test";
  c.keep_scratch = true;
  c.job = "keep";
  std::string p = write_scratch(c, "(check-sat)\n");
  CHECK(std::filesystem::path(p).filename().string().rfind("keep-", 0) == 0);
  drop_scratch(c, p);
  CHECK(std::filesystem::exists(p));
  c.keep_scratch = false;
  drop_scratch(c, p);
  CHECK_FALSE(std::filesystem::exists(p));
}

TEST_CASE("external smt solver" * doctest::skip(!have_z3())) {
  SolverConfig c = z3cfg();
  CHECK(check_valid(ob({}, "true", "true"), c).kind == ValidityResult::Kind::Valid);
  ValidityResult r = check_valid(ob({"x"}, "true", "x > 0"), c);
  REQUIRE(r.kind == ValidityResult::Kind::Invalid);
  CHECK(r.counterexample["x"] <= 0);
  CHECK(check_valid(ob({"v", "x"}, "x = 1", "v = x => v > 0"), c).kind == ValidityResult::Kind::Valid);

  SortMap s{{"o", Sort::Real}};
  SatResult a = check_sat_qf(parse_formula("o = 1 && o <= 1"), s, c);
  REQUIRE(a.kind == SolverVerdict::Kind::Sat);
  CHECK(a.model.at("o") == 1);
  CHECK(check_sat_qf(parse_formula("o > 1 && o <= 1"), s, c).kind == SolverVerdict::Kind::Unsat);

  auto batch = check_sat_batch({parse_formula("x > 2 && x < 4"), parse_formula("x > 2 && x < 3"),
                                parse_formula("2*o = 1")},
                               s, c);
  REQUIRE(batch.size() == 3);
  CHECK(batch[0].kind == SolverVerdict::Kind::Sat);
  CHECK(batch[0].model.at("x") == 3);
  CHECK(batch[1].kind == SolverVerdict::Kind::Unsat);
  CHECK(batch[2].model.at("o") == Rational(1, 2));
}

TEST_CASE("external horn solver" * doctest::skip(!have_z3())) {
  SolverConfig c = z3cfg();
  CHECK(run_horn("(set-logic HORN)\n(check-sat)\n", c).kind == SolverVerdict::Kind::Sat);
  CHECK(run_horn("(set-logic HORN)\n(assert false)\n(check-sat)\n", c).kind == SolverVerdict::Kind::Unsat);
}
