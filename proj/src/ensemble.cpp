#include "batchode/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "batchode/ensemble_engine.hpp"
#include "batchode/events.hpp"

namespace batchode {

bool EnsembleResult::any_failure() const {
  return std::any_of(instances.begin(), instances.end(), [](const InstanceResult& r) { return is_failure(r.status); });
}

EnsembleResult merge_results(std::vector<PartialResult> parts) {
  if (parts.empty()) throw std::invalid_argument("merge_results: no partitions");
  std::sort(parts.begin(), parts.end(), [](const PartialResult& a, const PartialResult& b) { return a.first < b.first; });
  EnsembleResult out;
  std::size_t next = 0;
  for (auto& part : parts) {
    if (part.first < next) throw std::invalid_argument("merge_results: overlapping partitions");
    if (part.first > next) throw std::invalid_argument("merge_results: gap between partitions");
    for (std::size_t j = 0; j < part.instances.size(); ++j)
      if (part.instances[j].index != part.first + j)
        throw std::invalid_argument("merge_results: partition indices are not contiguous");
    next += part.instances.size();
    for (auto& r : part.instances) out.instances.push_back(std::move(r));
  }
  return out;
}

void RunOptions::validate() const {
  if (width != 1 && width != 2 && width != 4 && width != 8) throw std::invalid_argument("width must be 1, 2, 4 or 8");
  if (unroll < 1 || unroll > 16) throw std::invalid_argument("unroll must be in [1, 16]");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (fixed_step) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (n_steps < 0) throw std::invalid_argument("step count must be non-negative");
  } else {
    if (n_transient < 0) throw std::invalid_argument("n_transient must be non-negative");
    if (n_record < 1) throw std::invalid_argument("n_record must be at least 1");
    tolerances.validate();
    control.validate();
  }
}

namespace {

template <class M>
struct NoEvents {
  template <int W>
  std::vector<EventSpec<W, M::dim, M::n_params>> events() const {
    return {};
  }
};

struct LorenzSetup : NoEvents<LorenzModel> {
  using Model = LorenzModel;
  Model model{};
  std::array<double, 1> params(double p) const { return {p}; }
  std::array<double, 3> initial_state(double) const { return {10.0, 10.0, 10.0}; }
};

template <IntroVariant V>
struct IntroSetup : NoEvents<IntroModel<V>> {
  using Model = IntroModel<V>;
  Model model{};
  double x0 = -0.5;
  std::array<double, 1> params(double p) const { return {p}; }
  std::array<double, 1> initial_state(double) const { return {x0}; }
};

struct KMSetup : NoEvents<KellerMiksisModel> {
  using Model = KellerMiksisModel;
  Model model{};
  KMPhysical base{};
  std::array<double, 13> params(double f1) const {
    KMPhysical phys = base;
    phys.frequency1 = f1;
    return km_coefficients(phys);
  }
  std::array<double, 2> initial_state(double) const { return {1.0, 0.0}; }
};

struct ValveSetup {
  using Model = ValveModel;
  Model model{};
  double impact_tolerance = 1e-6;

  std::array<double, 1> params(double q) const { return {q}; }
  std::array<double, 3> initial_state(double) const {
    return {0.2, 0.0, model.constants.precompression + 0.2};
  }

  template <int W>
  std::vector<EventSpec<W, 3, 1>> events() const {
    using Spec = EventSpec<W, 3, 1>;
    const ImpactLaw law{model.constants.restitution, 0, 1};
    Spec impact;
    impact.function = [](const auto&, const auto& y, const auto&) { return y[0]; };
    impact.direction = CrossingDirection::positive_to_negative;
    impact.tolerance = impact_tolerance;
    impact.action = EventAction::apply_state_map;
    impact.state_map = [law](const LaneMask<W>& lanes, typename Spec::Vec& y, const typename Spec::Params&) {
      return apply_impact(lanes, y, law);
    };
    Spec peak;
    peak.function = [](const auto&, const auto& y, const auto&) { return y[1]; };
    peak.direction = CrossingDirection::positive_to_negative;
    peak.tolerance = impact_tolerance;
    peak.action = EventAction::terminate_phase;
    return {impact, peak};
  }
};

RunOptions fixed_step_options(const RunOptions& options) {
  RunOptions o = options;
  o.fixed_step = true;
  return o;
}

}  // namespace

EnsembleResult run_lorenz_benchmark(std::size_t n, const RunOptions& options) {
  if (n < 1) throw std::invalid_argument("ensemble size must be at least 1");
  const std::vector<double> sweep = n == 1 ? std::vector<double>{0.0} : linspace(0.0, 21.0, n);
  return run_ensemble(LorenzSetup{}, sweep, fixed_step_options(options));
}

EnsembleResult run_micro(IntroVariant variant, std::span<const double> sweep, double x0, const RunOptions& options) {
  const RunOptions o = fixed_step_options(options);
  switch (variant) {
    case IntroVariant::square: {
      IntroSetup<IntroVariant::square> s;
      s.x0 = x0;
      return run_ensemble(s, sweep, o);
    }
    case IntroVariant::division: {
      IntroSetup<IntroVariant::division> s;
      s.x0 = x0;
      return run_ensemble(s, sweep, o);
    }
    case IntroVariant::sine: {
      IntroSetup<IntroVariant::sine> s;
      s.x0 = x0;
      return run_ensemble(s, sweep, o);
    }
  }
  throw std::invalid_argument("unknown model variant");
}

EnsembleResult run_micro(IntroVariant variant, std::size_t n, const RunOptions& options) {
  if (n < 1) throw std::invalid_argument("ensemble size must be at least 1");
  const std::vector<double> sweep = n == 1 ? std::vector<double>{0.1} : linspace(0.1, 1.0, n);
  return run_micro(variant, sweep, -0.5, options);
}

EnsembleResult run_km(std::span<const double> frequencies, const RunOptions& options, const KMPhysical& base) {
  KMSetup s;
  s.base = base;
  RunOptions o = options;
  o.fixed_step = false;
  o.phase = PhaseSpec{1.0, false};
  o.peak = PeakRecord::phase_maximum;
  return run_ensemble(s, frequencies, o);
}

EnsembleResult run_km_frequency_response(std::size_t n, const RunOptions& options) {
  if (n < 1) throw std::invalid_argument("ensemble size must be at least 1");
  const std::vector<double> sweep = n == 1 ? std::vector<double>{20e3} : logspace(20e3, 1e6, n);
  return run_km(sweep, options);
}

std::vector<double> default_work_precision_tolerances() {
  std::vector<double> t;
  for (int k = 4; k <= 15; ++k) t.push_back(std::pow(10.0, -k));
  return t;
}

std::vector<WorkPrecisionRow> run_km_work_precision(std::span<const double> frequencies,
                                                    std::span<const double> tolerances,
                                                    std::span<const StepperKind> steppers,
                                                    const RunOptions& options) {
  constexpr double reference_tolerance = 1e-15;
  if (tolerances.empty()) throw std::invalid_argument("no tolerances given");
  if (steppers.empty()) throw std::invalid_argument("no steppers given");

  auto run_at = [&](StepperKind kind, double tol) {
    RunOptions o = options;
    o.stepper = kind;
    o.tolerances = Tolerances{tol, tol};
    o.n_transient = 0;
    o.n_record = 2;
    return run_km(frequencies, o);
  };

  std::vector<WorkPrecisionRow> rows;
  for (const StepperKind kind : steppers) {
    if (kind == StepperKind::rk4) throw std::invalid_argument("work-precision study needs an adaptive stepper");
    const EnsembleResult ref = run_at(kind, reference_tolerance);
    for (const double tol : tolerances) {
      const EnsembleResult res = tol == reference_tolerance ? ref : run_at(kind, tol);
      for (std::size_t j = 0; j < res.instances.size(); ++j) {
        const auto& r = res.instances[j];
        const auto& rr = ref.instances[j];
        WorkPrecisionRow row;
        row.frequency = r.sweep_value;
        row.tolerance = tol;
        row.stepper = kind;
        const bool ok = !is_failure(r.status) && !is_failure(rr.status);
        row.error = ok ? std::abs(r.final_state[0] - rr.final_state[0]) : std::numeric_limits<double>::quiet_NaN();
        row.rhs_evals = r.counters.rhs_evals;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

StepControl valve_step_control() {
  StepControl c;
  c.dt_initial = 1e-2;
  c.dt_max = 1.0;
  return c;
}

EnsembleResult run_valve(std::span<const double> flow_rates, const RunOptions& options, const ValveOptions& valve) {
  if (!(valve.impact_tolerance > 0.0)) throw std::invalid_argument("impact tolerance must be positive");
  ValveSetup s;
  s.model.constants = valve.constants;
  s.impact_tolerance = valve.impact_tolerance;
  RunOptions o = options;
  o.fixed_step = false;
  o.phase = PhaseSpec{std::numeric_limits<double>::infinity(), true};
  o.peak = PeakRecord::phase_end_value;
  if (o.control.dt_initial <= 0.0) o.control.dt_initial = valve_step_control().dt_initial;
  if (o.control.dt_max <= 0.0) o.control.dt_max = valve_step_control().dt_max;
  return run_ensemble(s, flow_rates, o);
}

EnsembleResult run_valve_bifurcation(std::size_t n, const RunOptions& options, const ValveOptions& valve) {
  if (n < 1) throw std::invalid_argument("ensemble size must be at least 1");
  const std::vector<double> sweep = n == 1 ? std::vector<double>{0.2} : linspace(0.2, 10.0, n);
  return run_valve(sweep, options, valve);
}

double median_runtime(const std::function<double()>& run_once, int repetitions, bool warm_up) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (warm_up) run_once();
  std::vector<double> t;
  for (int i = 0; i < repetitions; ++i) t.push_back(run_once());
  std::sort(t.begin(), t.end());
  const std::size_t mid = t.size() / 2;
  return t.size() % 2 == 1 ? t[mid] : 0.5 * (t[mid - 1] + t[mid]);
}

std::string to_string(StepperKind kind) {
  switch (kind) {
    case StepperKind::rk4: return "rk4";
    case StepperKind::cash_karp: return "ck";
    case StepperKind::dormand_prince: return "dp";
  }
  return "unknown";
}

StepperKind parse_stepper(const std::string& name) {
  if (name == "rk4") return StepperKind::rk4;
  if (name == "ck" || name == "cash-karp") return StepperKind::cash_karp;
  if (name == "dp" || name == "dormand-prince") return StepperKind::dormand_prince;
  throw std::invalid_argument("unknown stepper '" + name + "'");
}

}  // namespace batchode
