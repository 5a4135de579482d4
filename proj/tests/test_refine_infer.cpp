#include <doctest.h>

#include "impverif/frontend.hpp"
#include "impverif/pipeline.hpp"
#include "impverif/qchc.hpp"
#include "impverif/refine_infer.hpp"
#include "impverif/syntax.hpp"
#include "test_util.hpp"

#include <set>

using namespace impverif;

namespace {

const std::string kI = "$i", kV = "$nu";

Term V(const std::string& x) { return Term::var(x); }
Formula cmp(const Term& a, Cmp c, const Term& b) { return Formula::atom(a, c, b); }

SolverConfig z3cfg() {
  SolverConfig c;
  c.smt_cmd = "z3";
  c.timeout_secs = 60;
  return c;
}

TemplateTable templates_of(const std::string& text) {
  Frontend fe = run_frontend(text);
  return gen_templates(fe.core, fe.types);
}

std::string init_fragment() {
  std::string text = read_file(bench_path("init.imp"));
  return text.substr(0, text.find("init_assert")) + "{\n  let p = alloc 10 in let m = 10 in let d = init(m, p) in 0\n}\n";
}

const OwnTemplate& at_site(const TemplateTable& t, const std::string& fn, const std::string& site) {
  for (const auto& tp : t.templates)
    if (tp.fn == fn && tp.site == site) return tp;
  FAIL("no template at " << site);
  throw std::logic_error("unreachable");
}

void set_interval(OwnSolution& s, const OwnTemplate& t, int lo0, int lo_n, int hi0, int hi_n, int o) {
  s.values[t.lo_coeffs[0]] = lo0;
  s.values[t.lo_coeffs[1]] = lo_n;
  s.values[t.hi_coeffs[0]] = hi0;
  s.values[t.hi_coeffs[1]] = hi_n;
  s.values[t.own] = o;
}

PredApp app(const std::string& p, const Term& i) { return PredApp{p, {V("n"), i, V(kV)}}; }

HornClause horn(std::vector<PredApp> body, Formula c, PredApp head) {
  HornClause h;
  h.body = std::move(body);
  h.constraint = std::move(c);
  h.head = std::move(head);
  return h;
}

std::string ground(const PredApp& a, const Valuation& v) {
  std::string s = a.pred + "(";
  for (const auto& t : a.args) s += rational_to_string(t.evaluate(v)) + ",";
  return s + ")";
}

// Ground instances over a box of values, as (body atoms, head atom) pairs.
using GroundRule = std::pair<std::set<std::string>, std::string>;

std::set<GroundRule> ground_rules(const std::vector<HornClause>& cs) {
  std::set<GroundRule> out;
  for (const auto& c : cs) {
    for (const auto& u : c.universals()) REQUIRE((u == "n" || u == kI || u == kV));
    for (int n = 1; n <= 5; ++n)
      for (int i = -3; i <= 7; ++i)
        for (int nu = -1; nu <= 1; ++nu) {
          Valuation v{{"n", Rational(n)}, {kI, Rational(i)}, {kV, Rational(nu)}};
          if (!c.constraint.evaluate(v)) continue;
          std::set<std::string> body;
          for (const auto& b : c.body) body.insert(ground(b, v));
          std::string head = ground(*c.head, v);
          if (!body.count(head)) out.insert({body, head});
        }
  }
  return out;
}

CHCSystem parse_system(const std::string& text) { return parse_smtlib_horn(text); }

}  // namespace

TEST_CASE("Horn clauses of p := 0; let q = p + 1 match the expected blocks") {
  TemplateTable t = templates_of(init_fragment());
  const OwnTemplate& t0 = t.templates[t.funs.at("init").pre.at("p")];
  const OwnTemplate& t1 = at_site(t, "init", "assign");
  const OwnTemplate& t2 = at_site(t, "init", "split-parent");
  const OwnTemplate& t3 = at_site(t, "init", "split-child");

  OwnSolution sol;
  for (const auto& [u, sort] : t.unknowns) sol.values[u] = 0;
  set_interval(sol, t0, 0, 0, -1, 1, 1);
  set_interval(sol, t1, 0, 0, -1, 1, 1);
  set_interval(sol, t2, 0, 0, 0, 0, 1);
  set_interval(sol, t3, 0, 0, -2, 1, 1);
  CHCSystem chc = gen_chc(t, sol);

  const std::map<std::string, std::string> names = {{"Pre_init_p", "P0"},
                                                    {"P" + std::to_string(t1.id), "P1"},
                                                    {"P" + std::to_string(t2.id), "P2"},
                                                    {"P" + std::to_string(t3.id), "P3"}};
  std::vector<HornClause> got;
  for (const auto& c : chc.clauses) {
    if (!c.head || !names.count(c.head->pred)) continue;
    bool inside = std::all_of(c.body.begin(), c.body.end(), [&](const PredApp& b) {
      return b.pred == "Pre_init_p" || b.pred == "P" + std::to_string(t1.id);
    });
    if (!inside) continue;
    HornClause r = c;
    for (auto& b : r.body) b.pred = names.at(b.pred);
    r.head->pred = names.at(r.head->pred);
    got.push_back(r);
  }

  Term n = V("n"), i = V(kI), nu = V(kV);
  Formula pos = cmp(n, Cmp::Gt, Term(0));
  auto out_of = [&](const Term& hi) { return Formula::disj(cmp(i, Cmp::Lt, Term(0)), cmp(i, Cmp::Gt, hi)); };
  std::vector<HornClause> want = {
      horn({}, Formula::conj({pos, cmp(i, Cmp::Eq, Term(0)), cmp(nu, Cmp::Eq, Term(0))}), app("P1", i)),
      horn({app("P0", i)}, Formula::conj({pos, cmp(Term(0), Cmp::Lt, i), cmp(i, Cmp::Le, n - Term(1))}), app("P1", i)),
      horn({app("P1", Term(0))}, Formula::conj(pos, cmp(i, Cmp::Eq, Term(0))), app("P2", Term(0))),
      horn({app("P1", i + Term(1))}, Formula::conj({pos, cmp(Term(0), Cmp::Le, i), cmp(i, Cmp::Le, n - Term(2))}),
           app("P3", i)),
      horn({}, Formula::conj(pos, out_of(n - Term(1))), app("P0", i)),
      horn({}, Formula::conj(pos, out_of(n - Term(1))), app("P1", i)),
      horn({}, Formula::conj(pos, cmp(i, Cmp::Ne, Term(0))), app("P2", i)),
      horn({}, Formula::conj(pos, out_of(n - Term(2))), app("P3", i)),
  };
  CHECK(ground_rules(got) == ground_rules(want));
}

TEST_CASE("tiny Horn systems" * doctest::skip(!have_z3())) {
  SolverConfig cfg = z3cfg();
  auto solve = [&](const std::string& body) { return solve_chc("(set-logic HORN)\n" + body + "(check-sat)\n", cfg).kind; };
  CHECK(solve("") == ChcResult::Kind::Sat);
  CHECK(solve("(assert (=> true false))\n") == ChcResult::Kind::Unsat);
  CHECK(solve("(declare-fun P (Int) Bool)\n(assert (forall ((x Int)) (=> (and (P x) (> x 0)) false)))\n") ==
        ChcResult::Kind::Sat);
  CHECK(solve("(declare-fun P (Int) Bool)\n(assert (forall ((x Int)) (=> (= x 1) (P x))))\n"
              "(assert (forall ((x Int)) (=> (and (P x) (= x 1)) false)))\n") == ChcResult::Kind::Unsat);
}

TEST_CASE("init is safe end to end" * doctest::skip(!have_z3())) {
  VerifyOptions o;
  o.solver = z3cfg();
  VerifyReport r = verify_source(read_file(bench_path("init.imp")), o);
  CHECK(r.verdict == VerifyReport::Verdict::Safe);
  CHECK(r.chc_result == "sat");
  CHECK(r.audit_invalid == 0);
}

TEST_CASE("generated systems are well formed and emitted deterministically" * doctest::skip(!have_z3())) {
  SolverConfig cfg = z3cfg();
  for (const std::string b : {"init.imp", "sum.imp", "ex_init.imp"}) {
    CAPTURE(b);
    TemplateTable t = templates_of(read_file(bench_path(b)));
    auto inv = infer_param_invariants(t, cfg);
    auto cs = gen_own_constraints(t, inv);
    OwnResult own = solve_exists_forall(cs, t.unknowns, SolveParams{}, cfg);
    REQUIRE(own.kind == OwnResult::Kind::Solved);
    CHCSystem chc = gen_chc(t, own.solution, inv);
    CHECK(check_chc(chc).empty());
    for (const auto& c : chc.clauses) {
      for (const auto& p : c.body) {
        const PredVar* pv = chc.find(p.pred);
        REQUIRE(pv);
        CHECK(p.args.size() == pv->params.size());
      }
      for (const auto& v : c.universals()) CHECK_FALSE(t.unknowns.count(v));
    }
    std::string text = emit_smtlib_horn(chc);
    CHECK(text == emit_smtlib_horn(gen_chc(t, own.solution, inv)));

    CHCSystem back = parse_system(text);
    CHECK(back.preds.size() == chc.preds.size());
    CHECK(back.clauses.size() == chc.clauses.size());
    CHECK(emit_smtlib_horn(back) == text);
  }
}

TEST_CASE("model audit" * doctest::skip(!have_z3())) {
  SolverConfig cfg = z3cfg();
  TemplateTable t = templates_of(read_file(bench_path("init.imp")));
  auto inv = infer_param_invariants(t, cfg);
  OwnResult own = solve_exists_forall(gen_own_constraints(t, inv), t.unknowns, SolveParams{}, cfg);
  REQUIRE(own.kind == OwnResult::Kind::Solved);
  CHCSystem chc = gen_chc(t, own.solution, inv);

  auto model = solve_chc_qualifiers(chc, cfg);
  REQUIRE(model.has_value());
  ChcAudit good = audit_chc_model(chc, *model, cfg);
  CHECK(good.invalid.empty());
  CHECK(good.skipped.empty());

  auto reread = read_chc_model(print_chc_model(chc, *model));
  REQUIRE(reread.has_value());
  CHECK(audit_chc_model(chc, *reread, cfg).invalid.empty());

  ChcModel none = *model;
  for (auto& [p, in] : none) in.body = Formula::bottom();
  CHECK_FALSE(audit_chc_model(chc, none, cfg).invalid.empty());

  ChcModel partial = *model;
  partial.erase(partial.begin());
  CHECK_FALSE(audit_chc_model(chc, partial, cfg).skipped.empty());
}
