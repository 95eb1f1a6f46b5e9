#pragma once

// Generic ensemble execution. A setup type describes one experiment:
//
//   struct Setup {
//     using Model = ...;
//     Model model;
//     std::array<double, Model::n_params> params(double sweep_value) const;
//     std::array<double, Model::dim> initial_state(double sweep_value) const;
//     template <int W> std::vector<EventSpec<W, Model::dim, Model::n_params>> events() const;
//   };
//
// run_ensemble lays the sweep out in lane packs, forms groups of `unroll`
// packs, splits the groups into contiguous blocks (one per worker) and merges
// the per-worker results in sweep order.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "batchode/batch.hpp"
#include "batchode/control.hpp"
#include "batchode/ensemble.hpp"
#include "batchode/events.hpp"

namespace batchode {

namespace detail {

/// Tracks y1 extremes and step-size extremes of every lane over one phase.
template <int W, int D, int P>
class PhaseRecorder {
 public:
  using State = LaneState<W, D, P>;
  using Pack = LanePack<W>;

  explicit PhaseRecorder(int m) : y_max_(m), y_min_(m), y_end_(m), dt_min_(m), dt_max_(m), events_start_(m) {
    for (int g = 0; g < m; ++g) {
      dt_min_[g].fill(std::numeric_limits<double>::infinity());
      dt_max_[g].fill(0.0);
    }
  }

  void begin_phase(const BatchGroup<W, D, P>& group, bool recording) {
    recording_ = recording;
    for (int g = 0; g < group.unroll(); ++g) {
      const auto& st = group.states[g];
      y_max_[g] = st.y[0];
      y_min_[g] = st.y[0];
      y_end_[g] = st.y[0];
      for (int i = 0; i < W; ++i) events_start_[g][i] = st.counters[i].events;
    }
  }

  void on_step(int g, const State& st, const StepInfo<W>& info) {
    y_max_[g] = select(info.committed, max(y_max_[g], st.y[0]), y_max_[g]);
    y_min_[g] = select(info.committed, min(y_min_[g], st.y[0]), y_min_[g]);
    if (!recording_ || info.natural.none()) return;
    for (int i = 0; i < W; ++i) {
      if (!info.natural[i]) continue;
      dt_min_[g][i] = std::min(dt_min_[g][i], info.dt[i]);
      dt_max_[g][i] = std::max(dt_max_[g][i], info.dt[i]);
    }
  }

  void on_phase_end(int g, const State& st, const LaneMask<W>& finished) {
    y_end_[g] = select(finished, st.y[0], y_end_[g]);
  }

  PhaseRecord record(int g, int lane, const State& st, PeakRecord peak) const {
    PhaseRecord r;
    r.y1_max = peak == PeakRecord::phase_end_value ? y_end_[g][lane] : y_max_[g][lane];
    r.y1_min = y_min_[g][lane];
    r.events = st.counters[lane].events - events_start_[g][lane];
    return r;
  }

  double dt_min(int g, int lane) const { return dt_min_[g][lane]; }
  double dt_max(int g, int lane) const { return dt_max_[g][lane]; }

 private:
  bool recording_ = false;
  std::vector<Pack> y_max_, y_min_, y_end_;
  std::vector<std::array<double, W>> dt_min_, dt_max_;
  std::vector<std::array<std::int64_t, W>> events_start_;
};

template <int W, class Setup>
std::vector<InstanceResult> run_group_range(const Setup& setup, std::span<const double> sweep,
                                            const RunOptions& opt, std::size_t group_begin,
                                            std::size_t group_end) {
  using Model = typename Setup::Model;
  constexpr int D = Model::dim;
  constexpr int P = Model::n_params;
  using Group = BatchGroup<W, D, P>;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  const std::size_t n = sweep.size();
  const std::size_t per_group = static_cast<std::size_t>(W) * static_cast<std::size_t>(opt.unroll);
  const std::vector<EventSpec<W, D, P>> events = setup.template events<W>();
  const int n_phases = opt.n_transient + opt.n_record;

  std::vector<InstanceResult> out;
  for (std::size_t gi = group_begin; gi < group_end; ++gi) {
    const std::size_t first = gi * per_group;
    const std::size_t count = std::min(per_group, n - first);
    const int m = static_cast<int>((count + W - 1) / W);

    Group group;
    group.states.resize(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      auto& st = group.states[static_cast<std::size_t>(k)];
      for (int i = 0; i < W; ++i) {
        const std::size_t idx = first + static_cast<std::size_t>(k * W + i);
        const bool real = idx < n;
        const double v = sweep[real ? idx : n - 1];
        const auto p = setup.params(v);
        const auto y0 = setup.initial_state(v);
        for (int j = 0; j < P; ++j) st.params[j].set(i, p[j]);
        for (int d = 0; d < D; ++d) st.y[d].set(i, y0[d]);
        if (!real) {
          st.active.set(i, false);
          st.status[i] = LaneStatus::padding;
        }
      }
    }

    std::vector<std::vector<PhaseRecord>> records(count);
    PhaseRecorder<W, D, P> recorder(m);

    if (opt.fixed_step) {
      advance_fixed(setup.model, group, opt.dt, opt.n_steps);
    } else {
      for (int phase = 0; phase < n_phases; ++phase) {
        const bool recording = phase >= opt.n_transient;
        if (!group.any_active()) {
          if (recording)
            for (auto& r : records) r.push_back(PhaseRecord{nan, nan, 0});
          continue;
        }
        std::vector<LaneMask<W>> active_at_start(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) active_at_start[static_cast<std::size_t>(k)] = group.states[static_cast<std::size_t>(k)].active;

        recorder.begin_phase(group, recording);
        advance_adaptive(opt.stepper, setup.model, group, opt.tolerances, opt.control, opt.phase,
                         std::span<const EventSpec<W, D, P>>(events), recorder);
        if (!recording) continue;
        for (std::size_t j = 0; j < count; ++j) {
          const int k = static_cast<int>(j / W);
          const int i = static_cast<int>(j % W);
          const auto& st = group.states[static_cast<std::size_t>(k)];
          if (active_at_start[static_cast<std::size_t>(k)][i] && st.active[i])
            records[j].push_back(recorder.record(k, i, st, opt.peak));
          else
            records[j].push_back(PhaseRecord{nan, nan, 0});
        }
      }
    }

    for (std::size_t j = 0; j < count; ++j) {
      const int k = static_cast<int>(j / W);
      const int i = static_cast<int>(j % W);
      const auto& st = group.states[static_cast<std::size_t>(k)];
      InstanceResult r;
      r.index = first + j;
      r.sweep_value = sweep[first + j];
      r.records = std::move(records[j]);
      r.final_state.resize(D);
      for (int d = 0; d < D; ++d) r.final_state[static_cast<std::size_t>(d)] = st.y[d][i];
      r.final_t = st.t[i];
      r.counters = st.counters[i];
      r.status = st.status[i];
      const double lo = recorder.dt_min(k, i);
      const double hi = recorder.dt_max(k, i);
      r.min_dt = std::isfinite(lo) ? lo : nan;
      r.max_dt = hi > 0.0 ? hi : nan;
      out.push_back(std::move(r));
    }
  }
  return out;
}

template <int W, class Setup>
EnsembleResult run_ensemble_width(const Setup& setup, std::span<const double> sweep, const RunOptions& opt) {
  const std::size_t per_group = static_cast<std::size_t>(W) * static_cast<std::size_t>(opt.unroll);
  const std::size_t n_groups = (sweep.size() + per_group - 1) / per_group;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(opt.workers), n_groups);

  std::vector<PartialResult> parts(workers);
  std::vector<std::exception_ptr> errors(workers);
  const std::function<void(std::size_t)> work = [&](std::size_t w) {
    try {
      const std::size_t begin = w * n_groups / workers;
      const std::size_t end = (w + 1) * n_groups / workers;
      parts[w].first = begin * per_group;
      parts[w].instances = run_group_range<W>(setup, sweep, opt, begin, end);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  const auto t0 = std::chrono::steady_clock::now();
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  const auto t1 = std::chrono::steady_clock::now();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  EnsembleResult result = merge_results(std::move(parts));
  result.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

}  // namespace detail

template <class Setup>
EnsembleResult run_ensemble(const Setup& setup, std::span<const double> sweep, const RunOptions& options) {
  options.validate();
  detail::check_nonempty_ensemble(sweep.size());
  switch (options.width) {
    case 1: return detail::run_ensemble_width<1>(setup, sweep, options);
    case 2: return detail::run_ensemble_width<2>(setup, sweep, options);
    case 4: return detail::run_ensemble_width<4>(setup, sweep, options);
    case 8: return detail::run_ensemble_width<8>(setup, sweep, options);
    default: throw std::invalid_argument("width must be 1, 2, 4 or 8");
  }
}

}  // namespace batchode
