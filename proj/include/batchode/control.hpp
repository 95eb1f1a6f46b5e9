#pragma once

// Drivers: the fixed-step loop and the per-lane asynchronous adaptive loop
// with event handling and observer hooks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "batchode/batch.hpp"
#include "batchode/events.hpp"
#include "batchode/lane_pack.hpp"
#include "batchode/steppers.hpp"

namespace batchode {

struct Tolerances {
  double atol = 1e-10;
  double rtol = 1e-10;

  void validate() const {
    if (!(atol >= 0.0) || !(rtol >= 0.0)) throw std::invalid_argument("tolerances must be non-negative");
    if (atol == 0.0 && rtol == 0.0) throw std::invalid_argument("atol and rtol cannot both be zero");
  }
};

/// Elementary integral controller settings. Zero for `dt_initial`/`dt_max`
/// means "derive from the phase length".
struct StepControl {
  double safety = 0.9;
  double shrink_min = 0.1;
  double grow_max = 5.0;
  double dt_initial = 0.0;
  double dt_min = 1e-12;
  double dt_max = 0.0;
  std::int64_t max_steps = 10'000'000;       // attempts per lane per phase
  std::int64_t max_phase_events = 100'000;   // state-map events per lane per phase

  void validate() const {
    if (!(shrink_min > 0.0 && shrink_min < 1.0 && grow_max > 1.0))
      throw std::invalid_argument("step control needs 0 < shrink_min < 1 < grow_max");
    if (!(dt_min > 0.0)) throw std::invalid_argument("dt_min must be positive");
    if (dt_max != 0.0 && !(dt_min < dt_max)) throw std::invalid_argument("dt_min must be below dt_max");
    if (max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
  }
};

/// max_i |err_i| / (atol + rtol * max(|y_old_i|, |y_new_i|)); +inf on lanes
/// with any non-finite input.
template <int W, std::size_t D>
LanePack<W> error_norm(const std::array<LanePack<W>, D>& err, const std::array<LanePack<W>, D>& y_old,
                       const std::array<LanePack<W>, D>& y_new, const Tolerances& tol) {
  using Pack = LanePack<W>;
  Pack norm{0.0};
  LaneMask<W> finite{true};
  for (std::size_t i = 0; i < D; ++i) {
    const Pack scale = Pack(tol.atol) + Pack(tol.rtol) * max(abs(y_old[i]), abs(y_new[i]));
    const Pack ratio = abs(err[i]) / scale;
    finite &= isfinite(err[i]) & isfinite(y_old[i]) & isfinite(y_new[i]);
    norm = max(norm, ratio);
  }
  return select(finite, norm, Pack(std::numeric_limits<double>::infinity()));
}

template <int W>
struct AdaptedStep {
  LanePack<W> dt;
  LaneMask<W> below_min;  // unclamped proposal fell under dt_min
};

/// dt * clamp(safety * norm^(-1/order), shrink_min, grow_max), then clamped
/// to [dt_min, dt_max].
template <int W>
AdaptedStep<W> adapt_dt(const LanePack<W>& dt, const LanePack<W>& norm, const StepControl& ctl, double dt_max,
                        int order = 5) {
  using Pack = LanePack<W>;
  const double exponent = -1.0 / static_cast<double>(order);
  Pack factor;
  for (int i = 0; i < W; ++i) factor.set(i, ctl.safety * std::pow(norm[i], exponent));
  factor = min(max(factor, Pack(ctl.shrink_min)), Pack(ctl.grow_max));
  const Pack raw = dt * factor;
  AdaptedStep<W> out;
  out.below_min = raw < Pack(ctl.dt_min);
  out.dt = min(max(raw, Pack(ctl.dt_min)), Pack(dt_max));
  return out;
}

/// Runs exactly `n_steps` RK4 steps of size `dt` on every active lane.
/// Lanes that end non-finite are flagged and deactivated.
template <class Model, int W, int D, int P>
void advance_fixed(const Model& model, BatchGroup<W, D, P>& group, double dt, std::int64_t n_steps) {
  using Pack = LanePack<W>;
  if (!(dt > 0.0)) throw std::invalid_argument("advance_fixed: dt must be positive");
  if (n_steps < 0) throw std::invalid_argument("advance_fixed: negative step count");
  if (n_steps == 0) return;

  const int m = group.unroll();
  constexpr int max_m = BatchGroup<W, D, P>::max_unroll;
  std::array<Pack, max_m> t0;
  std::array<Pack, max_m> dts;
  std::array<std::array<Pack, D>, max_m> y_new;
  bool all_active = true;
  for (int g = 0; g < m; ++g) {
    t0[g] = group.states[g].t;
    dts[g] = Pack(dt);
    all_active = all_active && group.states[g].active.all();
  }
  const std::span<const LaneState<W, D, P>> states(group.states.data(), group.states.size());
  const std::span<const Pack> dt_span(dts.data(), m);
  const std::span<std::array<Pack, D>> out(y_new.data(), m);

  if (m == 1) {
    auto& st = group.states[0];
    const auto params = st.params;
    const LaneMask<W> active = st.active;
    const Pack dt_pack(dt);
    std::array<Pack, D> y = st.y, next;
    for (std::int64_t j = 0; j < n_steps; ++j) {
      const Pack t = t0[0] + Pack(static_cast<double>(j) * dt);
      detail::rk4_pack<Model, W, D, P>(model, t, y, params, dt_pack, next);
      if (all_active) {
        y = next;
      } else {
        for (int d = 0; d < D; ++d) y[d] = select(active, next[d], y[d]);
      }
    }
    st.y = y;
  }
  for (std::int64_t j = 0; m > 1 && j < n_steps; ++j) {
    const Pack offset{static_cast<double>(j) * dt};
    for (int g = 0; g < m; ++g) group.states[g].t = t0[g] + offset;
    detail::rk4_stages<Model, W, D, P>(model, states, dt_span, out);
    if (all_active) {
      for (int g = 0; g < m; ++g) group.states[g].y = y_new[g];
    } else {
      for (int g = 0; g < m; ++g) {
        auto& st = group.states[g];
        for (int d = 0; d < D; ++d) st.y[d] = select(st.active, y_new[g][d], st.y[d]);
      }
    }
  }

  const Pack span_t{static_cast<double>(n_steps) * dt};
  for (int g = 0; g < m; ++g) {
    auto& st = group.states[g];
    st.t = select(st.active, t0[g] + span_t, t0[g]);
    for (int i = 0; i < W; ++i) {
      if (!st.active[i]) continue;
      st.counters[i].accepted += n_steps;
      st.counters[i].rhs_evals += 4 * n_steps;
    }
    LaneMask<W> finite{true};
    for (int d = 0; d < D; ++d) finite &= isfinite(st.y[d]);
    st.fail(~finite, Model::failure_status);
  }
}

/// How a phase ends for each lane: at a fixed time span after its start, at
/// a terminating event, or whichever comes first.
struct PhaseSpec {
  double span = 1.0;  // +inf for purely event-terminated phases
  bool event_terminated = false;
};

template <int W>
struct StepInfo {
  LaneMask<W> committed;
  LaneMask<W> natural;  // committed with the controller's step (not cut by phase end or an event)
  LanePack<W> dt;       // length of the committed step
};

/// Observer that ignores everything.
struct NullObserver {
  template <class State, class Info>
  void on_step(int /*group*/, const State& /*state*/, const Info& /*info*/) {}
  template <class State, class Mask>
  void on_phase_end(int /*group*/, const State& /*state*/, const Mask& /*finished*/) {}
};

/// Integrates one phase of every active lane of `group` with per-lane
/// adaptive steps. Each attempt uses each lane's own dt; accepted lanes
/// commit, rejected lanes retry with a smaller step, and lanes leave the loop
/// when their phase ends. Events are checked on every accepted step; the
/// earliest refined event wins and ties go to the earlier-listed event.
/// `observer.on_step` runs after each commit (post event action) and
/// `observer.on_phase_end` once per lane when its phase finishes. An observer
/// may also define on_event(group, event, lanes, bracket_width, y_before,
/// y_after), called for lanes changed by a state map.
template <class Model, class Observer, int W, int D, int P>
void advance_adaptive(StepperKind kind, const Model& model, BatchGroup<W, D, P>& group, const Tolerances& tol,
                      const StepControl& ctl, const PhaseSpec& phase,
                      std::span<const EventSpec<W, D, P>> events, Observer& observer) {
  using Pack = LanePack<W>;
  using Mask = LaneMask<W>;
  using Vec = std::array<Pack, D>;
  constexpr int max_m = BatchGroup<W, D, P>::max_unroll;
  constexpr int max_events = 4;

  tol.validate();
  ctl.validate();
  if (events.size() > max_events) throw std::invalid_argument("advance_adaptive: too many events");
  if (!(phase.span > 0.0)) throw std::invalid_argument("advance_adaptive: phase span must be positive");
  const bool finite_span = std::isfinite(phase.span);
  if (!finite_span && (ctl.dt_initial <= 0.0 || ctl.dt_max <= 0.0))
    throw std::invalid_argument("advance_adaptive: unbounded phases need explicit dt_initial and dt_max");

  const double dt_max = ctl.dt_max > 0.0 ? ctl.dt_max : phase.span;
  const double dt_start =
      std::clamp(ctl.dt_initial > 0.0 ? ctl.dt_initial : 1e-2 * phase.span, ctl.dt_min, dt_max);
  const int order = kind == StepperKind::rk4 ? 4 : 5;
  const int m = group.unroll();
  const int n_events = static_cast<int>(events.size());

  std::array<Mask, max_m> running;
  std::array<Pack, max_m> t_end;
  std::array<Pack, max_m> dt_try;
  std::array<Mask, max_m> truncated;
  std::array<StepResult<W, D>, max_m> results;
  std::array<std::array<Pack, max_events>, max_m> g_old;
  std::array<std::array<std::int64_t, W>, max_m> attempts{};
  std::array<std::array<std::int64_t, W>, max_m> phase_events{};

  for (int g = 0; g < m; ++g) {
    auto& st = group.states[g];
    running[g] = st.active;
    t_end[g] = st.t + Pack(phase.span);
    st.dt = select(running[g], Pack(dt_start), st.dt);
    for (int e = 0; e < n_events; ++e) g_old[g][e] = events[e].function(st.t, st.y, st.params);
  }

  auto any_running = [&] {
    for (int g = 0; g < m; ++g)
      if (running[g].any()) return true;
    return false;
  };

  const std::span<LaneState<W, D, P>> states(group.states.data(), group.states.size());
  const Pack stretch{1.01};

  while (any_running()) {
    for (int g = 0; g < m; ++g) {
      const auto& st = group.states[g];
      const Pack remaining = t_end[g] - st.t;
      truncated[g] = running[g] & (st.t + stretch * st.dt >= t_end[g]);
      dt_try[g] = select(truncated[g], remaining, st.dt);
    }
    step(kind, model, states, std::span<const Pack>(dt_try.data(), m), std::span<const Mask>(running.data(), m),
         std::span<StepResult<W, D>>(results.data(), m));

    for (int g = 0; g < m; ++g) {
      auto& st = group.states[g];
      auto& res = results[g];
      Mask run = running[g];
      if (run.none()) continue;

      const Mask bad = run & ~res.finite;
      st.fail(bad, Model::failure_status);
      run &= ~bad;

      const Pack norm = error_norm(res.err, st.y, res.y_new, tol);
      Mask accept = run & (norm <= Pack(1.0));
      Mask reject = run & ~accept;
      const AdaptedStep<W> next = adapt_dt(dt_try[g], norm, ctl, dt_max, order);

      const Mask underflow = reject & next.below_min;
      st.fail(underflow, LaneStatus::step_size_underflow);
      run &= ~underflow;
      reject &= ~underflow;

      Pack t_commit = select(truncated[g], t_end[g], st.t + dt_try[g]);
      Pack dt_taken = dt_try[g];
      Vec y_commit = res.y_new;
      Mask natural = accept & ~truncated[g];

      // Events on accepted steps.
      std::array<Mask, max_events> won{};
      std::array<EventLocation<W, D>, max_events> where{};
      if (n_events > 0 && accept.any()) {
        std::array<Mask, max_events> crossed{};
        Mask any_event{false};
        for (int e = 0; e < n_events; ++e) {
          const Pack g_new = events[e].function(t_commit, y_commit, st.params);
          crossed[e] = accept & detect_crossing(g_old[g][e], g_new, events[e].direction);
          if (crossed[e].any()) {
            where[e] = refine_bisection(kind, model, st, crossed[e], dt_try[g], y_commit, g_old[g][e], events[e]);
            any_event |= crossed[e];
          }
        }
        if (any_event.any()) {
          for (int i = 0; i < W; ++i) {
            if (!any_event[i]) continue;
            int best = -1;
            double best_dt = 0.0;
            for (int e = 0; e < n_events; ++e) {
              if (!crossed[e][i]) continue;
              const double dt_e = where[e].dt[i];
              // Later-listed events must be strictly earlier by more than the bracket width to win.
              if (best < 0 || dt_e < best_dt - std::max(events[e].tolerance, events[best].tolerance)) {
                best = e;
                best_dt = dt_e;
              }
            }
            won[best].set(i, true);
          }
          for (int e = 0; e < n_events; ++e) {
            const Mask lanes = won[e];
            if (lanes.none()) continue;
            const Mask full_step = lanes & (where[e].dt == dt_try[g]);
            t_commit = select(lanes, select(full_step, t_commit, st.t + where[e].dt), t_commit);
            dt_taken = select(lanes, where[e].dt, dt_taken);
            for (int d = 0; d < D; ++d) y_commit[d] = select(lanes, where[e].y[d], y_commit[d]);
            natural &= ~lanes;
          }
        }
      }

      st.t = select(accept, t_commit, st.t);
      for (int d = 0; d < D; ++d) st.y[d] = select(accept, y_commit[d], st.y[d]);
      for (int i = 0; i < W; ++i) {
        if (accept[i]) ++st.counters[i].accepted;
        if (reject[i]) ++st.counters[i].rejected;
        if (run[i]) ++attempts[g][i];
      }

      Mask finished = accept & (st.t >= t_end[g]);
      for (int e = 0; e < n_events; ++e) {
        const Mask lanes = won[e];
        if (lanes.none()) continue;
        switch (events[e].action) {
          case EventAction::terminate_phase:
            finished |= lanes;
            break;
          case EventAction::apply_state_map: {
            const Vec y_before = st.y;
            const Mask applied = events[e].state_map(lanes, st.y, st.params);
            if constexpr (requires { observer.on_event(g, e, applied, where[e].width, y_before, st.y); })
              observer.on_event(g, e, applied, where[e].width, y_before, st.y);
            for (int i = 0; i < W; ++i) {
              if (!applied[i]) continue;
              ++st.counters[i].events;
              ++phase_events[g][i];
            }
            break;
          }
          case EventAction::record_only:
            break;
        }
      }
      for (int e = 0; e < n_events; ++e)
        g_old[g][e] = select(accept, events[e].function(st.t, st.y, st.params), g_old[g][e]);

      observer.on_step(g, st, StepInfo<W>{accept, natural, dt_taken});

      st.dt = select(run, next.dt, st.dt);

      Mask chatter{false};
      Mask budget{false};
      for (int i = 0; i < W; ++i) {
        if (!run[i] || finished[i]) continue;
        if (phase_events[g][i] >= ctl.max_phase_events) chatter.set(i, true);
        else if (attempts[g][i] >= ctl.max_steps) budget.set(i, true);
      }
      st.fail(chatter, LaneStatus::possible_chatter);
      st.fail(budget, phase.event_terminated ? LaneStatus::no_phase_end_event : LaneStatus::step_budget_exhausted);
      run &= ~(chatter | budget);

      const Mask ended = run & finished;
      running[g] = run & ~finished;
      if (ended.any()) observer.on_phase_end(g, st, ended);
    }
  }
}

template <class Model, class Observer, int W, int D, int P>
void advance_adaptive(StepperKind kind, const Model& model, BatchGroup<W, D, P>& group, const Tolerances& tol,
                      const StepControl& ctl, const PhaseSpec& phase, Observer& observer) {
  advance_adaptive(kind, model, group, tol, ctl, phase, std::span<const EventSpec<W, D, P>>{}, observer);
}

}  // namespace batchode
