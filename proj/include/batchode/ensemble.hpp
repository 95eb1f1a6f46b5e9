#pragma once

// Experiment orchestration: parameter sweeps, batching into unrolled groups,
// static partitioning over worker threads, multi-phase protocols and the
// deterministic merge of per-worker results.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "batchode/batch.hpp"
#include "batchode/control.hpp"
#include "batchode/models.hpp"
#include "batchode/tableau.hpp"

namespace batchode {

/// Observables of one recorded phase.
struct PhaseRecord {
  double y1_max = 0.0;
  double y1_min = 0.0;
  std::int64_t events = 0;  // state-map events (impacts) during the phase
};

struct InstanceResult {
  std::size_t index = 0;
  double sweep_value = 0.0;
  std::vector<PhaseRecord> records;
  std::vector<double> final_state;
  double final_t = 0.0;
  LaneCounters counters;
  LaneStatus status = LaneStatus::ok;
  // Extremes of controller-chosen committed step sizes during recorded phases.
  double min_dt = 0.0;
  double max_dt = 0.0;
};

struct EnsembleResult {
  std::vector<InstanceResult> instances;  // in sweep order
  double runtime_seconds = 0.0;

  bool any_failure() const;
};

/// Instances [first, first + instances.size()) produced by one worker.
struct PartialResult {
  std::size_t first = 0;
  std::vector<InstanceResult> instances;
};

/// Orders partitions by sweep index and concatenates them. Throws
/// std::invalid_argument on an empty list, overlaps or gaps.
EnsembleResult merge_results(std::vector<PartialResult> parts);

/// What the per-phase y1_max observable holds.
enum class PeakRecord {
  phase_maximum,    // maximum over committed step points of the phase
  phase_end_value,  // y1 where the phase ended (Poincare section point)
};

struct RunOptions {
  int width = 4;
  int unroll = 1;
  int workers = 1;

  // Fixed-step protocol (RK4).
  bool fixed_step = false;
  double dt = 0.01;
  std::int64_t n_steps = 1000;

  // Adaptive multi-phase protocol.
  StepperKind stepper = StepperKind::cash_karp;
  Tolerances tolerances{};
  StepControl control{};
  PhaseSpec phase{};
  int n_transient = 0;
  int n_record = 1;
  PeakRecord peak = PeakRecord::phase_maximum;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Experiments.

/// Fixed-step RK4 Lorenz ensemble with p = linspace(0, 21, n).
EnsembleResult run_lorenz_benchmark(std::size_t n, const RunOptions& options);

/// Fixed-step RK4 introductory model with p = linspace(0.1, 1.0, n), x0 = -0.5.
EnsembleResult run_micro(IntroVariant variant, std::size_t n, const RunOptions& options);
/// Same with an explicit parameter sweep.
EnsembleResult run_micro(IntroVariant variant, std::span<const double> sweep, double x0, const RunOptions& options);

/// Driving-frequency sweep for the Keller-Miksis model, unit phases in tau,
/// initial state (1, 0). `frequencies` in Hz.
EnsembleResult run_km(std::span<const double> frequencies, const RunOptions& options,
                      const KMPhysical& base = KMPhysical{});

/// f1 = logspace(20 kHz, 1 MHz, n); transient phases discarded, one y1_max per record phase.
EnsembleResult run_km_frequency_response(std::size_t n, const RunOptions& options);

struct WorkPrecisionRow {
  double frequency = 0.0;
  double tolerance = 0.0;
  StepperKind stepper = StepperKind::cash_karp;
  double error = 0.0;  // |y1(2) - y1_ref(2)|
  std::int64_t rhs_evals = 0;
};

/// Tolerance / global error / work study over tau in [0, 2]. The reference for
/// each (frequency, stepper) is the run at the smallest tolerance in `tolerances`.
std::vector<WorkPrecisionRow> run_km_work_precision(std::span<const double> frequencies,
                                                    std::span<const double> tolerances,
                                                    std::span<const StepperKind> steppers,
                                                    const RunOptions& options);

/// Default tolerance list 1e-4 ... 1e-15.
std::vector<double> default_work_precision_tolerances();

struct ValveOptions {
  double impact_tolerance = 1e-6;
  ValveParams constants{};
};

/// Pressure relief valve sweep over q. Phases run from one local maximum of
/// the displacement to the next; impacts apply the restitution law.
EnsembleResult run_valve(std::span<const double> flow_rates, const RunOptions& options,
                         const ValveOptions& valve = ValveOptions{});

/// q = linspace(0.2, 10, n).
EnsembleResult run_valve_bifurcation(std::size_t n, const RunOptions& options,
                                     const ValveOptions& valve = ValveOptions{});

/// Step control used for event-terminated valve phases.
StepControl valve_step_control();

/// One warm-up call, then the median wall time of `repetitions` calls.
double median_runtime(const std::function<double()>& run_once, int repetitions = 3, bool warm_up = true);

std::string to_string(StepperKind kind);
StepperKind parse_stepper(const std::string& name);

}  // namespace batchode
