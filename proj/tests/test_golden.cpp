#include <doctest.h>

#include "impverif/pipeline.hpp"
#include "test_util.hpp"

#include <cstdlib>
#include <filesystem>

#include <unistd.h>

using namespace impverif;
namespace fs = std::filesystem;

// Set IMPVERIF_UPDATE_GOLDEN=1 to rewrite the snapshots.
TEST_CASE("no-solver emission matches the golden snapshots") {
  fs::path dir = fs::temp_directory_path() / ("impverif-golden-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  fs::path golden = fs::path(IMPVERIF_TEST_DATA) / "golden";
  bool update = std::getenv("IMPVERIF_UPDATE_GOLDEN") != nullptr;
  for (const auto& b : benchmark_names()) {
    CAPTURE(b);
    std::string stem = fs::path(b).stem().string();
    VerifyOptions o;
    o.no_solvers = true;
    o.solver.smt_cmd = "/nonexistent";
    o.solver.chc_cmd = "/nonexistent";
    o.emit_own_constraints = (dir / (stem + ".own.smt2")).string();
    o.emit_chc = (dir / (stem + ".chc.smt2")).string();
    VerifyReport r = verify_source(read_file(bench_path(b)), o);
    CHECK(r.verdict == VerifyReport::Verdict::Unknown);
    CHECK(r.artifacts.size() == 2);
    for (const auto& ext : {".own.smt2", ".chc.smt2"}) {
      std::string got = read_file((dir / (stem + ext)).string());
      fs::path want = golden / (stem + ext);
      if (update) {
        fs::create_directories(golden);
        fs::copy_file(dir / (stem + ext), want, fs::copy_options::overwrite_existing);
      }
      REQUIRE(fs::exists(want));
      CHECK(got == read_file(want.string()));
    }
  }
  fs::remove_all(dir);
}
