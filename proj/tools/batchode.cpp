// batchode: runs the ensemble benchmarks and writes CSV results.
//
// Exit status: 0 on success, 1 when some lanes ended with a failure status
// (the run still completes and its CSV is written), 2 on usage or I/O errors.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "batchode/csv.hpp"
#include "batchode/ensemble.hpp"

namespace {

using namespace batchode;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Result text is assembled in memory and written in one go, so a failed run
// never leaves a truncated file behind.
void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("cannot write to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file '" + path + "'");
  out << text;
  out.close();
  if (!out) throw IoError("error while writing '" + path + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    T v{};
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size())
      throw CLI::ValidationError("list", "cannot parse '" + item + "' in '" + text + "'");
    values.push_back(v);
    pos = comma + 1;
  }
  return values;
}

// Reports failed lanes on stderr; returns the exit status for the run.
int summarize_failures(const EnsembleResult& result, const std::string& what) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : result.instances)
    if (is_failure(r.status)) ++counts[std::string(to_string(r.status))];
  if (counts.empty()) return 0;
  std::cerr << what << ": lanes ended with failure flags:";
  for (const auto& [name, n] : counts) std::cerr << ' ' << name << '=' << n;
  std::cerr << '\n';
  return 1;
}

struct Common {
  int width = 4;
  int unroll = 1;
  int workers = 1;
  std::string out = "-";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--width", c.width, "Lanes per pack")->check(CLI::IsMember({1, 2, 4, 8}));
  cmd->add_option("--unroll", c.unroll, "Packs advanced together")->check(CLI::Range(1, 16));
  cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output CSV path, - for stdout");
}

RunOptions base_options(const Common& c) {
  RunOptions o;
  o.width = c.width;
  o.unroll = c.unroll;
  o.workers = c.workers;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble ODE benchmarks"};
  app.require_subcommand(1);
  int status = 0;
  std::function<void()> action;

  // lorenz-perf
  Common lorenz_c;
  std::string n_list = "1024,2048,4096,8192,16384,32768,65536,131072,262144,524288,1048576";
  double lorenz_dt = 0.01;
  std::int64_t lorenz_steps = 1000;
  auto* lorenz = app.add_subcommand("lorenz-perf", "Fixed-step RK4 Lorenz runtime versus ensemble size");
  lorenz->add_option("--n-list", n_list, "Comma-separated ensemble sizes");
  lorenz->add_option("--dt", lorenz_dt, "Time step")->check(CLI::PositiveNumber);
  lorenz->add_option("--steps", lorenz_steps, "Number of steps")->check(CLI::NonNegativeNumber);
  add_common(lorenz, lorenz_c);
  lorenz->callback([&] {
    action = [&] {
      const auto sizes = parse_list<std::size_t>(n_list);
      RunOptions o = base_options(lorenz_c);
      o.dt = lorenz_dt;
      o.n_steps = lorenz_steps;
      std::vector<LorenzPerfRow> rows;
      for (const std::size_t n : sizes) {
        if (n < 1) throw CLI::ValidationError("--n-list", "sizes must be positive");
        EnsembleResult last;
        const double t = median_runtime([&] {
          last = run_lorenz_benchmark(n, o);
          return last.runtime_seconds;
        });
        rows.push_back({n, t, o.width, o.unroll, o.workers});
        std::cerr << "lorenz N=" << n << " runtime " << t << " s\n";
        status = std::max(status, summarize_failures(last, "lorenz N=" + std::to_string(n)));
      }
      std::ostringstream os;
      write_lorenz_perf_csv(os, rows);
      emit(lorenz_c.out, os.str());
    };
  });

  // km-response
  Common km_c;
  std::size_t km_n = 256;
  double km_tol = 1e-10;
  int km_transient = 1024;
  int km_record = 64;
  std::string km_stepper = "ck";
  auto* km = app.add_subcommand("km-response", "Keller-Miksis frequency response");
  km->add_option("--n", km_n, "Number of frequencies")->check(CLI::PositiveNumber);
  km->add_option("--tol", km_tol, "Absolute and relative tolerance")->check(CLI::PositiveNumber);
  km->add_option("--transient", km_transient, "Discarded phases")->check(CLI::NonNegativeNumber);
  km->add_option("--record", km_record, "Recorded phases")->check(CLI::PositiveNumber);
  km->add_option("--stepper", km_stepper, "ck or dp")->check(CLI::IsMember({"ck", "dp"}));
  add_common(km, km_c);
  km->callback([&] {
    action = [&] {
      RunOptions o = base_options(km_c);
      o.stepper = parse_stepper(km_stepper);
      o.tolerances = Tolerances{km_tol, km_tol};
      o.n_transient = km_transient;
      o.n_record = km_record;
      const EnsembleResult res = run_km_frequency_response(km_n, o);
      std::cerr << "km-response N=" << km_n << " runtime " << res.runtime_seconds << " s\n";
      status = summarize_failures(res, "km-response");
      std::ostringstream os;
      write_km_response_csv(os, res);
      emit(km_c.out, os.str());
    };
  });

  // km-work-precision
  Common wp_c;
  std::string wp_freqs = "20000,100000,500000";
  std::string wp_tols = "1e-4,1e-5,1e-6,1e-7,1e-8,1e-9,1e-10,1e-11,1e-12,1e-13,1e-14,1e-15";
  std::string wp_steppers = "ck,dp";
  auto* wp = app.add_subcommand("km-work-precision", "Tolerance, global error and work on tau in [0, 2]");
  wp->add_option("--freqs", wp_freqs, "Comma-separated driving frequencies [Hz]");
  wp->add_option("--tols", wp_tols, "Comma-separated tolerances");
  wp->add_option("--steppers", wp_steppers, "Comma-separated steppers (ck, dp)");
  add_common(wp, wp_c);
  wp->callback([&] {
    action = [&] {
      const auto freqs = parse_list<double>(wp_freqs);
      const auto tols = parse_list<double>(wp_tols);
      std::vector<StepperKind> kinds;
      std::stringstream ss(wp_steppers);
      for (std::string item; std::getline(ss, item, ',');) {
        if (item != "ck" && item != "dp") throw CLI::ValidationError("--steppers", "unknown stepper '" + item + "'");
        kinds.push_back(parse_stepper(item));
      }
      for (const double f : freqs)
        if (!(f > 0.0)) throw CLI::ValidationError("--freqs", "frequencies must be positive");
      for (const double t : tols)
        if (!(t > 0.0)) throw CLI::ValidationError("--tols", "tolerances must be positive");
      const auto rows = run_km_work_precision(freqs, tols, kinds, base_options(wp_c));
      for (const auto& r : rows)
        if (std::isnan(r.error)) status = 1;
      if (status != 0) std::cerr << "km-work-precision: some runs ended with failure flags\n";
      std::ostringstream os;
      write_work_precision_csv(os, rows);
      emit(wp_c.out, os.str());
    };
  });

  // valve-bifurcation
  Common valve_c;
  std::size_t valve_n = 256;
  double valve_tol = 1e-10;
  double impact_tol = 1e-6;
  int valve_transient = 1024;
  int valve_record = 32;
  auto* valve = app.add_subcommand("valve-bifurcation", "Pressure relief valve bifurcation diagram");
  valve->add_option("--n", valve_n, "Number of flow rates")->check(CLI::PositiveNumber);
  valve->add_option("--tol", valve_tol, "Absolute and relative tolerance")->check(CLI::PositiveNumber);
  valve->add_option("--impact-tol", impact_tol, "Event time bracket tolerance")->check(CLI::PositiveNumber);
  valve->add_option("--transient", valve_transient, "Discarded phases")->check(CLI::NonNegativeNumber);
  valve->add_option("--record", valve_record, "Recorded phases")->check(CLI::PositiveNumber);
  add_common(valve, valve_c);
  valve->callback([&] {
    action = [&] {
      RunOptions o = base_options(valve_c);
      o.tolerances = Tolerances{valve_tol, valve_tol};
      o.control = valve_step_control();
      o.n_transient = valve_transient;
      o.n_record = valve_record;
      ValveOptions vo;
      vo.impact_tolerance = impact_tol;
      const EnsembleResult res = run_valve_bifurcation(valve_n, o, vo);
      std::cerr << "valve-bifurcation N=" << valve_n << " runtime " << res.runtime_seconds << " s\n";
      status = summarize_failures(res, "valve-bifurcation");
      std::ostringstream os;
      write_valve_csv(os, res);
      emit(valve_c.out, os.str());
    };
  });

  // micro
  Common micro_c;
  std::string micro_model = "intro";
  std::size_t micro_n = 65536;
  double micro_dt = 0.01;
  std::int64_t micro_steps = 1000;
  auto* micro = app.add_subcommand("micro", "Fixed-step RK4 on the one-dimensional introductory models");
  micro->add_option("--model", micro_model, "intro, intro-div or intro-sin")
      ->check(CLI::IsMember({"intro", "intro-div", "intro-sin"}));
  micro->add_option("--n", micro_n, "Ensemble size")->check(CLI::PositiveNumber);
  micro->add_option("--dt", micro_dt, "Time step")->check(CLI::PositiveNumber);
  micro->add_option("--steps", micro_steps, "Number of steps")->check(CLI::NonNegativeNumber);
  add_common(micro, micro_c);
  micro->callback([&] {
    action = [&] {
      const IntroVariant variant = micro_model == "intro"       ? IntroVariant::square
                                   : micro_model == "intro-div" ? IntroVariant::division
                                                                : IntroVariant::sine;
      RunOptions o = base_options(micro_c);
      o.dt = micro_dt;
      o.n_steps = micro_steps;
      EnsembleResult last;
      const double t = median_runtime([&] {
        last = run_micro(variant, micro_n, o);
        return last.runtime_seconds;
      });
      std::cerr << micro_model << " N=" << micro_n << " runtime " << t << " s\n";
      status = summarize_failures(last, micro_model);
      std::ostringstream os;
      write_micro_csv(os, {{micro_model, micro_n, o.width, o.unroll, t}});
      emit(micro_c.out, os.str());
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    action();
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
