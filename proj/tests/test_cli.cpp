#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// stderr is discarded; only the CSV on stdout and the exit status matter here.
Run run(const std::string& args) {
  const std::string cmd = std::string(BATCHODE_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

}  // namespace

TEST_CASE("lorenz-perf writes one row per size") {
  const Run r = run("lorenz-perf --n-list 256 --steps 100");
  CHECK(r.status == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(r.out.rfind("N,runtime_seconds,runtime_per_instance_us,width,unroll,workers\n", 0) == 0);
  CHECK(rows[1][0] == "256");
  CHECK(rows[1][3] == "4");

  const Run two = run("lorenz-perf --n-list 1024,2048 --steps 100 --width 2 --unroll 2");
  CHECK(two.status == 0);
  CHECK(parse_csv(two.out).size() == 3);
}

TEST_CASE("usage and output errors exit with status 2") {
  CHECK(run("lorenz-perf --n-list 256 --bogus 1").status == 2);
  CHECK(run("").status == 2);
  CHECK(run("lorenz-perf --width 3").status == 2);
  CHECK(run("lorenz-perf --n-list 12,x").status == 2);
  CHECK(run("km-work-precision --steppers rk4").status == 2);
  CHECK(run("lorenz-perf --n-list 8 --steps 1 --out /nonexistent-dir/x.csv").status == 2);
  CHECK(run("--help").status == 0);
}

TEST_CASE("output file option") {
  const auto path = std::filesystem::temp_directory_path() / "batchode_cli_test.csv";
  std::filesystem::remove(path);
  const Run r = run("micro --model intro-div --n 64 --steps 10 --out " + path.string());
  CHECK(r.status == 0);
  CHECK(r.out.empty());
  REQUIRE(std::filesystem::exists(path));
  std::FILE* f = std::fopen(path.c_str(), "r");
  std::array<char, 256> buf{};
  const std::size_t n = std::fread(buf.data(), 1, buf.size() - 1, f);
  std::fclose(f);
  const auto rows = parse_csv(std::string(buf.data(), n));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"model", "N", "width", "unroll", "runtime_seconds"});
  CHECK(rows[1][0] == "intro-div");
  CHECK(rows[1][1] == "64");
  std::filesystem::remove(path);
}

TEST_CASE("km-response row count") {
  const Run r = run("km-response --n 16 --transient 2 --record 3 --tol 1e-8");
  CHECK(r.status == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 1 + 16 * 3);
  CHECK(rows[0] == std::vector<std::string>{"f1_hz", "phase_index", "y1_max", "n_f_total"});
  CHECK(std::stod(rows[1][0]) == 20e3);
  CHECK(std::stod(rows.back()[0]) == 1e6);
  CHECK(rows.back()[1] == "2");
}

TEST_CASE("km-work-precision header and default tolerance column") {
  const Run r = run("km-work-precision --freqs 100000 --steppers dp");
  CHECK(r.status == 0);
  CHECK(r.out.rfind("f1_hz,tolerance,stepper,E_abs,n_f_total\n", 0) == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 13);
  CHECK(std::stod(rows[1][1]) == 1e-4);
  CHECK(rows[12][1] == "1e-15");
  CHECK(rows[12][3] == "0");  // the reference itself
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k][2] == "dp");
}

TEST_CASE("valve-bifurcation rows and impact bands") {
  const Run r = run("valve-bifurcation --n 128 --transient 64 --record 4");
  CHECK(r.status == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 1 + 128 * 4);
  CHECK(rows[0] == std::vector<std::string>{"q", "phase_index", "y1_max", "y1_min", "n_impacts"});
  // Low flow rates impact at least once over the recorded phases (single
  // peak-to-peak phases of irregular orbits can miss the seat); high flow
  // rates never come near it.
  std::map<double, double> low_min;
  int high = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double q = std::stod(rows[k][0]);
    const double y_min = std::stod(rows[k][3]);
    if (q <= 2.0) {
      auto [it, fresh] = low_min.emplace(q, y_min);
      if (!fresh) it->second = std::min(it->second, y_min);
    }
    if (q >= 9.0) {
      ++high;
      CHECK(y_min > 1e-3);
    }
  }
  CHECK(low_min.size() > 10);
  for (const auto& [q, y_min] : low_min) {
    CAPTURE(q);
    CHECK(y_min <= 1e-6);
  }
  CHECK(high > 0);
}
