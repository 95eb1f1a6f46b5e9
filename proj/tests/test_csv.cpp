#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "batchode/csv.hpp"
#include "doctest.h"

using namespace batchode;

TEST_CASE("reals round-trip through their text form") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> ex(-300, 300);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(mant(rng), ex(rng));
    const std::string s = format_real(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_real(0.5) == "0.5");
  CHECK(format_real(1e-10) == "1e-10");
  CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("writer checks column counts and rejects separators") {
  std::ostringstream os;
  CsvWriter w(os, {"a", "b"});
  w.field(1).field("x");
  w.end_row();
  CHECK(os.str() == "a,b\n1,x\n");
  w.field(2);
  CHECK_THROWS_AS(w.end_row(), std::logic_error);

  std::ostringstream os2;
  CsvWriter w2(os2, {"a"});
  CHECK_THROWS_AS(w2.field("x,y"), std::invalid_argument);
  CHECK_THROWS_AS(w2.field("x\ny"), std::invalid_argument);
}

TEST_CASE("result tables have the documented headers") {
  std::ostringstream a, b, c, d, e;
  write_lorenz_perf_csv(a, {});
  write_micro_csv(b, {});
  write_km_response_csv(c, EnsembleResult{});
  write_work_precision_csv(d, {});
  write_valve_csv(e, EnsembleResult{});
  CHECK(a.str() == "N,runtime_seconds,runtime_per_instance_us,width,unroll,workers\n");
  CHECK(b.str() == "model,N,width,unroll,runtime_seconds\n");
  CHECK(c.str() == "f1_hz,phase_index,y1_max,n_f_total\n");
  CHECK(d.str() == "f1_hz,tolerance,stepper,E_abs,n_f_total\n");
  CHECK(e.str() == "q,phase_index,y1_max,y1_min,n_impacts\n");

  std::ostringstream rows;
  write_work_precision_csv(rows, {{20e3, 1e-6, StepperKind::dormand_prince, 3.5e-7, 1234}});
  CHECK(rows.str() == "f1_hz,tolerance,stepper,E_abs,n_f_total\n20000,1e-06,dp,3.5e-07,1234\n");
}
