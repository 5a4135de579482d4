// impverif verify FILE | impverif run FILE
#include "impverif/frontend.hpp"
#include "impverif/interp.hpp"
#include "impverif/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace impverif;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int exit_code(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Halt: return 0;
    case Outcome::Kind::AssertFail: return 3;
    case Outcome::Kind::AliasFail: return 4;
    case Outcome::Kind::Stuck: return 5;
    case Outcome::Kind::FuelExhausted: return 2;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifier for a small pointer language with fractional-ownership refinement types"};
  app.require_subcommand(1);

  std::string file;
  VerifyOptions vo;
  vo.solver = SolverConfig::from_env();
  bool json = false, dump_types = false;
  auto* verify = app.add_subcommand("verify", "infer ownership and refinement types; Safe or Unknown");
  verify->add_option("file", file, "program")->required()->check(CLI::ExistingFile);
  verify->add_option("--samples", vo.own.samples_per_round, "sample points per ownership round")
      ->capture_default_str();
  verify->add_option("--max-rounds", vo.own.max_rounds, "ownership sampling rounds")->capture_default_str();
  verify->add_option("--own-seed", vo.own.seed, "seed of the ownership sampler")->capture_default_str();
  verify->add_option("--smt-cmd", vo.solver.smt_cmd, "SMT solver command (\"builtin\": in-tree mini solver)")
      ->capture_default_str();
  verify->add_option("--chc-cmd", vo.solver.chc_cmd, "CHC solver command reading an SMT-LIB2 HORN file");
  verify->add_option("--chc-timeout", vo.solver.timeout_secs, "solver timeout in seconds")->capture_default_str();
  verify->add_option("--emit-own-constraints", vo.emit_own_constraints, "write ownership constraints (SMT-LIB2)");
  verify->add_option("--emit-chc", vo.emit_chc, "write the CHC system (SMT-LIB2 HORN)");
  verify->add_flag("--json", json, "print the report as JSON");
  verify->add_flag("--no-solvers", vo.no_solvers, "frontend, constraint generation and emission only");
  verify->add_flag("--keep-scratch", vo.solver.keep_scratch, "keep solver scratch files");
  verify->add_flag("--dump-simple-types", dump_types, "print the inferred simple types and stop");

  RunOptions ro;
  std::string init = "random";
  bool trace = false;
  auto* run = app.add_subcommand("run", "execute the program");
  run->add_option("file", file, "program")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", ro.seed, "seed for nondeterminism and initial memory")->capture_default_str();
  run->add_option("--fuel", ro.fuel, "step budget")->capture_default_str();
  run->add_option("--init", init, "initial memory: random | constant:K")->capture_default_str();
  run->add_flag("--trace", trace, "print the reduction rule of every step to stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    std::string text = slurp(file);
    if (*verify) {
      if (vo.solver.timeout_secs <= 0) throw std::runtime_error("--chc-timeout must be positive");
      if (dump_types) {
        std::cout << run_frontend(text).types.dump();
        return 0;
      }
      VerifyReport r = verify_source(text, vo);
      if (json)
        std::cout << r.to_json().dump(2) << "\n";
      else
        std::cout << r.summary() << "\n";
      switch (r.verdict) {
        case VerifyReport::Verdict::Safe: return 0;
        case VerifyReport::Verdict::Unknown: return 2;
        case VerifyReport::Verdict::FrontendError: return 1;
      }
    }
    Frontend fe = run_frontend(text);
    ro.init = InitPolicy::parse(init);
    if (trace) ro.trace = &std::cerr;
    Outcome o = impverif::run(fe.core, ro);
    std::cout << o.to_string() << "\n";
    return exit_code(o);
  } catch (const std::exception& e) {
    std::cerr << "impverif: " << e.what() << "\n";
    return 1;
  }
}
