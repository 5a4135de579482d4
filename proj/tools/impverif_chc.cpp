// impverif-chc FILE: reads an SMT-LIB2 HORN script, tries the qualifier
// solver and otherwise hands the file to a fallback CHC command.
#include "impverif/qchc.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

using namespace impverif;

int main(int argc, char** argv) {
  CLI::App app{"CHC front end: qualifier inference with a fallback solver"};
  std::string file, fallback = "z3 fp.spacer.global=true";
  SolverConfig cfg = SolverConfig::from_env();
  cfg.job = "impverif-chc";
  app.add_option("file", file, "SMT-LIB2 HORN script")->required()->check(CLI::ExistingFile);
  app.add_option("--fallback", fallback, "CHC command run when no qualifier model exists (empty: none)");
  app.add_option("--smt-cmd", cfg.smt_cmd, "SMT solver for the qualifier checks");
  app.add_option("--timeout", cfg.timeout_secs, "per-query timeout in seconds");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(file);
  std::stringstream text;
  text << in.rdbuf();
  try {
    CHCSystem s = parse_smtlib_horn(text.str());
    if (auto m = solve_chc_qualifiers(s, cfg)) {
      std::cout << "sat\n" << print_chc_model(s, *m) << std::flush;
      return 0;
    }
  } catch (const HornParseError& e) {
    std::cerr << "impverif-chc: " << e.what() << "\n";
  } catch (const SolverError& e) {
    std::cerr << "impverif-chc: " << e.what() << "\n";
  }
  if (fallback.empty()) {
    std::cout << "unknown\n";
    return 0;
  }
  std::string cmd = fallback + " '" + file + "'";
  execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
  std::cerr << "impverif-chc: cannot run " << fallback << "\n";
  return 1;
}
