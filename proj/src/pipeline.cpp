#include "impverif/pipeline.hpp"

#include "impverif/frontend.hpp"
#include "impverif/refine_infer.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

namespace impverif {

const char* verdict_name(VerifyReport::Verdict v) {
  switch (v) {
    case VerifyReport::Verdict::Safe: return "Safe";
    case VerifyReport::Verdict::Unknown: return "Unknown";
    case VerifyReport::Verdict::FrontendError: return "FrontendError";
  }
  return "?";
}

const char* phase_name(VerifyReport::Phase p) {
  switch (p) {
    case VerifyReport::Phase::None: return "";
    case VerifyReport::Phase::SimpleTypes: return "SimpleTypes";
    case VerifyReport::Phase::Ownership: return "Ownership";
    case VerifyReport::Phase::Refinement: return "Refinement";
  }
  return "?";
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json j;
  j["verdict"] = verdict_name(verdict);
  j["phase"] = phase == Phase::None ? nlohmann::json(nullptr) : nlohmann::json(phase_name(phase));
  j["reason"] = reason;
  j["timings"] = nlohmann::json::object();
  for (const auto& [k, v] : timings) j["timings"][k] = v;
  j["counts"] = {{"templates", templates},       {"own_constraints", own_constraints},
                 {"own_unknowns", own_unknowns}, {"own_rounds", own_rounds},
                 {"chc_predicates", chc_predicates}, {"chc_clauses", chc_clauses}};
  j["artifacts"] = artifacts;
  j["invariants"] = invariants;
  j["ownership"] = ownership;
  j["chc"] = {{"command", chc_command}, {"result", chc_result}};
  j["audit"] = {{"audited", audited}, {"invalid", audit_invalid}, {"skipped", audit_skipped}};
  return j;
}

std::string VerifyReport::summary() const {
  std::string s = verdict_name(verdict);
  if (verdict == Verdict::Unknown) s += std::string("(") + phase_name(phase) + ")";
  if (!reason.empty()) s += ": " + reason;
  return s;
}

namespace {

class Clock {
 public:
  explicit Clock(VerifyReport& r) : r_(r) {}
  void lap(const std::string& phase) {
    auto now = std::chrono::steady_clock::now();
    r_.timings.emplace_back(phase, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  VerifyReport& r_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void write_file(VerifyReport& r, const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  r.artifacts.push_back(path);
}

VerifyReport& unknown(VerifyReport& r, VerifyReport::Phase p, const std::string& why) {
  r.verdict = VerifyReport::Verdict::Unknown;
  r.phase = p;
  r.reason = why;
  return r;
}

}  // namespace

VerifyReport verify_source(const std::string& text, const VerifyOptions& opts) {
  VerifyReport r;
  Clock clock(r);
  Frontend fe;
  try {
    fe = run_frontend(text);
  } catch (const std::runtime_error& e) {
    r.verdict = VerifyReport::Verdict::FrontendError;
    r.reason = e.what();
    return r;
  }
  clock.lap("frontend");

  TemplateTable t;
  try {
    t = gen_templates(fe.core, fe.types);
  } catch (const Unsupported& e) {
    return unknown(r, VerifyReport::Phase::SimpleTypes, e.what());
  }
  r.templates = t.templates.size();
  r.own_unknowns = t.unknowns.size();

  const SolverConfig& cfg = opts.solver;
  std::map<std::string, Formula> inv;
  if (!opts.no_solvers) inv = infer_param_invariants(t, cfg);
  for (const auto& [f, g] : inv) r.invariants[f] = g.to_string();
  auto cs = gen_own_constraints(t, inv);
  r.own_constraints = cs.size();
  if (!opts.emit_own_constraints.empty()) write_file(r, opts.emit_own_constraints, emit_own_smtlib(cs, t.unknowns));
  clock.lap("generation");

  if (opts.no_solvers) {
    if (!opts.emit_chc.empty()) write_file(r, opts.emit_chc, emit_smtlib_horn(t.skeleton));
    r.chc_predicates = t.skeleton.preds.size();
    r.chc_clauses = t.skeleton.clauses.size();
    return unknown(r, VerifyReport::Phase::Ownership, "solvers disabled");
  }

  OwnResult own;
  try {
    own = solve_exists_forall(cs, t.unknowns, opts.own, cfg);
  } catch (const SolverError& e) {
    return unknown(r, VerifyReport::Phase::Ownership, std::string("solver error: ") + e.what());
  }
  r.own_rounds = own.rounds;
  clock.lap("ownership");
  if (own.kind != OwnResult::Kind::Solved) return unknown(r, VerifyReport::Phase::Ownership, own.reason);
  if (auto bad = verify_own_solution(cs, own.solution, cfg); !bad.empty())
    return unknown(r, VerifyReport::Phase::Ownership,
                   std::to_string(bad.size()) + " ownership constraints not valid under the solution");
  for (const auto& tp : t.templates)
    r.ownership.push_back((tp.fn.empty() ? std::string("<main>") : tp.fn) + "." + tp.var + "@" + tp.site + ": [" +
                          own.solution.eval(tp.lo).to_string() + ", " + own.solution.eval(tp.hi).to_string() +
                          "] -> " + rational_to_string(own.solution.values[tp.own]));

  CHCSystem chc = gen_chc(t, own.solution, inv);
  r.chc_predicates = chc.preds.size();
  r.chc_clauses = chc.clauses.size();
  if (auto bad = check_chc(chc); !bad.empty()) return unknown(r, VerifyReport::Phase::Refinement, "malformed CHC: " + bad[0]);
  std::string script = emit_smtlib_horn(chc);
  if (!opts.emit_chc.empty()) write_file(r, opts.emit_chc, script);
  r.chc_command = cfg.effective_chc_cmd();
  ChcResult res = solve_chc(script, cfg);
  r.chc_result = chc_kind_name(res.kind);
  clock.lap("refinement");
  if (res.kind != ChcResult::Kind::Sat)
    return unknown(r, VerifyReport::Phase::Refinement,
                   "CHC solver answered " + r.chc_result + (res.diagnostic.empty() ? "" : ": " + res.diagnostic));

  std::set<std::string> quantified;
  if (auto m = read_chc_model(res.model_text, &quantified); m && (!m->empty() || !quantified.empty())) {
    ChcAudit a = audit_chc_model(chc, *m, cfg);
    r.audited = true;
    r.audit_invalid = a.invalid.size();
    r.audit_skipped = a.skipped.size();
    clock.lap("audit");
    if (!a.invalid.empty())
      return unknown(r, VerifyReport::Phase::Refinement,
                     "CHC model fails the audit on " + std::to_string(a.invalid.size()) + " clauses");
  }
  r.verdict = VerifyReport::Verdict::Safe;
  return r;
}

}  // namespace impverif
