#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("mgb_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

const Scratch& scratch() {
  static Scratch s;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch().dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run mgb(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch().dir / ("stdout_" + std::to_string(counter));
  const fs::path err = scratch().dir / ("stderr_" + std::to_string(counter++));
  const std::string cmd = std::string("\"") + MGB_CLI_PATH + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

fs::path config(const std::string& name) { return fs::path(MGB_CONFIG_DIR) / name; }

}  // namespace

TEST_CASE("bundled configurations validate") {
  for (const char* name : {"graph_heat.cfg", "graph_burgers.cfg", "gasket_approx.cfg",
                           "heat_convergence.cfg", "burgers_convergence.cfg", "lemma_suite.cfg"}) {
    CAPTURE(name);
    const auto r = mgb("validate " + quoted(config(name)));
    CHECK(r.code == 0);
    CHECK(r.out.find("experiment = ") != std::string::npos);
  }
}

TEST_CASE("usage errors exit with 2") {
  CHECK(mgb("").code == 2);
  CHECK(mgb("frobnicate").code == 2);
  CHECK(mgb("run " + quoted(scratch().dir / "missing.cfg")).code == 2);
}

TEST_CASE("graph-heat run writes its tables and passes its checks") {
  const fs::path out = scratch().dir / "heat";
  const auto r = mgb("run " + quoted(config("graph_heat.cfg")) + " --out " + quoted(out));
  REQUIRE(r.code == 0);
  for (const char* f : {"manifest.cfg", "summary.csv", "checks.csv", "eigenvalues.csv", "heat.csv"}) {
    CHECK(fs::exists(out / f));
  }
  CHECK(r.out.find("PASS conservation") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(slurp(out / "checks.csv").rfind("check,passed,detail\r\n", 0) == 0);
}

TEST_CASE("default heat-convergence configuration") {
  const auto cfg = write_config("minimal.cfg", "experiment = heat-convergence\n");
  const fs::path out = scratch().dir / "conv";
  const auto r = mgb("run " + quoted(cfg) + " --out " + quoted(out));
  CHECK(r.code == 0);
  const std::string table = slurp(out / "table.csv");
  CHECK(table.rfind("m,t,quantity,value\r\n", 0) == 0);
  CHECK(table.find("discrepancy") != std::string::npos);
  CHECK(r.out.find("PASS rate_t=0.1") != std::string::npos);
}

TEST_CASE("runs are deterministic and the manifest reproduces them") {
  const auto cfg = config("lemma_suite.cfg");
  const fs::path a = scratch().dir / "det_a", b = scratch().dir / "det_b", c = scratch().dir / "det_c";
  REQUIRE(mgb("run " + quoted(cfg) + " samples=20 --out " + quoted(a)).code == 0);
  REQUIRE(mgb("run " + quoted(cfg) + " samples=20 --out " + quoted(b)).code == 0);
  REQUIRE(mgb("run " + quoted(a / "manifest.cfg") + " --out " + quoted(c)).code == 0);
  for (const char* f : {"table.csv", "checks.csv", "summary.csv", "manifest.cfg"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / f) == slurp(c / f));
  }
  CHECK(slurp(a / "manifest.cfg").find("samples = 20") != std::string::npos);

  const fs::path d = scratch().dir / "det_d";
  REQUIRE(mgb("run " + quoted(cfg) + " samples=20 --seed 7 --out " + quoted(d)).code == 0);
  CHECK(slurp(a / "table.csv") != slurp(d / "table.csv"));
}

TEST_CASE("configuration errors name the line") {
  const auto bad_time = write_config("bad_time.cfg",
                                     "experiment = graph-heat\n[time]\ntimes = 0, -0.1\n");
  const auto r = mgb("validate " + quoted(bad_time));
  CHECK(r.code == 2);
  CHECK(r.err.find("bad_time.cfg:3:") != std::string::npos);

  const auto viscosity = write_config("viscosity.cfg", "experiment = graph-heat\nviscosity = 0.1\n");
  const auto v = mgb("validate " + quoted(viscosity));
  CHECK(v.code == 2);
  CHECK(v.err.find("sigma = 1") != std::string::npos);

  const auto stray = write_config("stray.cfg", "experiment = graph-heat\n[gasket]\nsamples = 5\n");
  CHECK(mgb("validate " + quoted(stray)).code == 2);

  const auto unknown = write_config("unknown.cfg", "experiment = wave\n");
  CHECK(mgb("validate " + quoted(unknown)).code == 2);

  CHECK(mgb("validate " + quoted(config("graph_heat.cfg")) + " cells_per_edge=zero").code == 2);
}

TEST_CASE("graph files and graph errors") {
  const auto graph = write_config("tri.graph",
                                  "# id tail head length energy_weight measure_weight\n"
                                  "0 a b 1 1 1\n1 b c 1 1 1\n2 c a 1 1 1\n");
  const auto good = write_config("file_graph.cfg", "experiment = graph-heat\n[graph]\ngraph = " +
                                                       graph.string() + "\ncells_per_edge = 10\n");
  CHECK(mgb("run " + quoted(good) + " --out " + quoted(scratch().dir / "file_graph")).code == 0);

  const auto split = write_config("split.graph", "0 a b 1 1 1\n1 c d 1 1 1\n");
  const auto bad = write_config("split_graph.cfg", "experiment = graph-heat\n[graph]\ngraph = " +
                                                       split.string() + "\n");
  const auto r = mgb("run " + quoted(bad) + " --out " + quoted(scratch().dir / "split"));
  CHECK(r.code == 2);
  CHECK(r.err.find("graph error") != std::string::npos);
}

TEST_CASE("numerical failures map to their exit codes") {
  const auto negative = write_config("negative.cfg",
                                     "experiment = graph-burgers\n[graph]\ngraph = interval\n"
                                     "cells_per_edge = 50\n[initial]\namplitude = 1.5\n");
  const auto p = mgb("run " + quoted(negative) + " --out " + quoted(scratch().dir / "neg"));
  CHECK(p.code == 2);
  CHECK(p.err.find("negative.cfg:6:") != std::string::npos);

  // Too coarse for the closed-form comparison: the run completes and reports the failed check.
  const auto coarse = write_config("coarse.cfg",
                                   "experiment = graph-burgers\n[graph]\ngraph = interval\n"
                                   "cells_per_edge = 4\n");
  const auto c = mgb("run " + quoted(coarse) + " --out " + quoted(scratch().dir / "coarse"));
  CHECK(c.code == 3);
  CHECK(c.out.find("FAIL closed_form") != std::string::npos);
  CHECK(fs::exists(scratch().dir / "coarse" / "trajectory.csv"));

  const auto too_many = write_config("modes.cfg",
                                     "experiment = graph-heat\n[graph]\ngraph = interval\n"
                                     "cells_per_edge = 4\nmodes = 50\n");
  CHECK(mgb("run " + quoted(too_many) + " --out " + quoted(scratch().dir / "modes")).code == 4);
}
