#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks against the installed binary. TQR_BIN is injected by
// the build so the tests always exercise the executable they shipped with.

namespace {

namespace fs = std::filesystem;

const fs::path kScratch = fs::path("cli_scratch");

struct Invocation {
  int exit_code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the binary through the shell with stdout/stderr captured to files.
// `env_prefix` lets a test set environment variables for the child only.
Invocation run(const std::string& args, const std::string& env_prefix = "") {
  static int seq = 0;
  const fs::path out = kScratch / ("out" + std::to_string(seq) + ".txt");
  const fs::path err = kScratch / ("err" + std::to_string(seq) + ".txt");
  ++seq;
  const std::string cmd = env_prefix + TQR_BIN + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Invocation inv;
  inv.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  inv.out = slurp(out);
  inv.err = slurp(err);
  return inv;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// First data line of a CSV (the line after the header).
std::string second_line(const std::string& text) {
  const auto nl = text.find('\n');
  if (nl == std::string::npos) return "";
  const auto end = text.find('\n', nl + 1);
  return text.substr(nl + 1, end - nl - 1);
}

double field(const std::string& csv_line, int index) {
  std::stringstream ss(csv_line);
  std::string cell;
  for (int i = 0; i <= index; ++i)
    if (!std::getline(ss, cell, ',')) return NAN;
  return std::strtod(cell.c_str(), nullptr);
}

struct ScratchSetup {
  ScratchSetup() {
    fs::remove_all(kScratch);
    fs::create_directories(kScratch);
  }
} setup_once;

std::string outdir_args(const std::string& base) {
  return " --outdir " + kScratch.string() + " --basename " + base;
}

}  // namespace

TEST_CASE("help exits cleanly, unknown commands do not") {
  CHECK(run("--help").exit_code == 0);
  const auto inv = run("frobnicate");
  CHECK(inv.exit_code == 2);
}

TEST_CASE("physical writes the derived quantities and a version stamp") {
  const auto inv = run("physical --nu-hz 2.02e6 --rabi-hz 25e3 "
                       "--vd-hz-per-um 174.7e6" +
                       outdir_args("phys"));
  REQUIRE(inv.exit_code == 0);
  const std::string csv = slurp(kScratch / "phys.csv");
  REQUIRE(contains(csv, "l0"));
  // Find the breathing-convention separation row and check the value.
  std::stringstream ss(csv);
  std::string line;
  bool found = false;
  while (std::getline(ss, line)) {
    if (line.rfind("l0,", 0) == 0) {
      found = true;
      CHECK(field(line, 1) == doctest::Approx(2.6962861528221603e-06)
                                  .epsilon(1e-10));
    }
  }
  CHECK(found);
  const std::string meta = slurp(kScratch / "phys.json");
  CHECK(contains(meta, "\"version\": \"1.0.0\""));
  CHECK(contains(meta, "\"command\": \"physical\""));
}

TEST_CASE("invalid inputs exit with 2 and a structured stderr line") {
  const auto neg = run("spectrum --omega -1" + outdir_args("neg"));
  CHECK(neg.exit_code == 2);
  CHECK(contains(neg.err, "\"error\""));
  CHECK(contains(neg.err, "InvalidArgument"));

  const auto res = run("roots --eps 0 --g 0.5" + outdir_args("res"));
  CHECK(res.exit_code == 2);
  CHECK(contains(res.err, "SectorUnavailable"));

  // Both inputs are degenerate at once: the coupling check wins and the
  // zero-coupling refusal is an internal-state error, not a usage one.
  const auto zg = run("roots --eps 0 --g 0" + outdir_args("zg"));
  CHECK(zg.exit_code == 3);
  CHECK(contains(zg.err, "ZeroCoupling"));
}

TEST_CASE("a starved truncation ladder exits with 3") {
  const auto inv = run("ground --Omega 1 --eps 0 --g 2 --gscan 2:2:1 "
                       "--nmax 130 --growth 32" +
                       outdir_args("ceil"));
  CHECK(inv.exit_code == 3);
  CHECK(contains(inv.err, "TruncationCeiling"));
}

TEST_CASE("scan output is byte-identical across thread counts") {
  const std::string window =
      "gfun --Omega 0.4 --eps 0.2 --g 0.5 --emin -0.5 --emax 0 --estep 2e-3";
  REQUIRE(run(window + " --threads 1" + outdir_args("t1")).exit_code == 0);
  REQUIRE(run(window + " --threads 3" + outdir_args("t3")).exit_code == 0);
  const std::string a = slurp(kScratch / "t1.csv");
  const std::string b = slurp(kScratch / "t3.csv");
  REQUIRE_FALSE(a.empty());
  CHECK(a == b);
}

TEST_CASE("the thread environment override wins over the flag") {
  const auto inv = run("meanfield --gscan 0.5:0.7:0.1 --threads 7" +
                           outdir_args("envthr"),
                       "TQRM_THREADS=2 ");
  REQUIRE(inv.exit_code == 0);
  CHECK(contains(slurp(kScratch / "envthr.json"), "\"threads\": 2"));
}

TEST_CASE("flags override config-file values, which override defaults") {
  const fs::path cfg = kScratch / "sweep.cfg";
  {
    std::ofstream out(cfg);
    out << "omega=2\nOmega=0.9\n";
  }
  const auto inv = run("spectrum --config " + cfg.string() +
                       " --Omega 0.4 --gscan 0:0.1:0.05 --k 2 --nmax 40" +
                       outdir_args("prec"));
  REQUIRE(inv.exit_code == 0);
  const std::string meta = slurp(kScratch / "prec.json");
  CHECK(contains(meta, "\"omega\": 2.0"));
  CHECK(contains(meta, "\"Omega\": 0.4"));
}

TEST_CASE("mean-field CSV carries the documented header") {
  const auto inv = run("meanfield --gscan 0.8:1.2:0.2" + outdir_args("mf"));
  REQUIRE(inv.exit_code == 0);
  const std::string csv = slurp(kScratch / "mf.csv");
  CHECK(csv.rfind("g[omega],alpha_star,E_G[omega],dE_dg,d2E_dg2\n", 0) == 0);
}

TEST_CASE("root scan recovers the pinned window and counts the candidates") {
  const auto inv = run("roots --Omega 0.4 --eps 0.2 --g 0.5 "
                       "--emin -0.6 --emax 0.1" +
                       outdir_args("roots"));
  REQUIRE(inv.exit_code == 0);
  const std::string csv = slurp(kScratch / "roots.csv");
  const std::string first = second_line(csv);
  CHECK(std::fabs(field(first, 0) - (-0.42599084579944613)) <= 1e-10);
  CHECK(field(first, 2) <= 1e-6);  // dense cross-check distance
  CHECK(contains(slurp(kScratch / "roots.json"),
                 "\"exceptional_candidates\": 1"));
}

TEST_CASE("verify prints its residual summary on stdout") {
  const auto inv = run("verify appendix --g 1" + outdir_args("ver"));
  REQUIRE(inv.exit_code == 0);
  CHECK(contains(inv.out, "appendix residual"));
  const std::string csv = slurp(kScratch / "ver.csv");
  CHECK(csv.rfind("check,residual,bound\n", 0) == 0);
}

TEST_CASE("single-observable ground scans narrow the table") {
  const auto inv = run("ground nb --eps 0 --gscan 0.4:0.6:0.1 --nmax 60" +
                       outdir_args("gnb"));
  REQUIRE(inv.exit_code == 0);
  const std::string csv = slurp(kScratch / "gnb.csv");
  CHECK(csv.rfind("g[omega],nb\n", 0) == 0);
}

TEST_CASE("wigner --plot writes a heatmap next to the table") {
  const auto inv = run("wigner --eps 0 --g 0.5 --nmax 40 --ps-points 81" +
                       outdir_args("wig") + " --plot");
  REQUIRE(inv.exit_code == 0);
  const std::string svg = slurp(kScratch / "wig.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  const std::string meta = slurp(kScratch / "wig.json");
  const auto pos = meta.find("\"integral\": ");
  REQUIRE(pos != std::string::npos);
  const double integral =
      std::strtod(meta.c_str() + pos + std::string("\"integral\": ").size(),
                  nullptr);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-4));
}
