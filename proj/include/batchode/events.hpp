#pragma once

// Event handling between committed steps: directed zero-crossing detection,
// bisection refinement by re-integration, and state maps such as the
// Newtonian impact law.

#include <array>
#include <functional>
#include <span>
#include <stdexcept>

#include "batchode/batch.hpp"
#include "batchode/lane_pack.hpp"
#include "batchode/steppers.hpp"

namespace batchode {

enum class CrossingDirection { positive_to_negative, negative_to_positive, any };

enum class EventAction { terminate_phase, apply_state_map, record_only };

template <int W, int D, int P>
struct EventSpec {
  using Pack = LanePack<W>;
  using Vec = std::array<Pack, D>;
  using Params = std::array<Pack, P>;

  /// Event function g(t, y, params).
  std::function<Pack(const Pack& t, const Vec& y, const Params& p)> function;
  CrossingDirection direction = CrossingDirection::any;
  /// Width of the time bracket at which refinement stops.
  double tolerance = 1e-6;
  EventAction action = EventAction::record_only;
  /// For apply_state_map: modifies `y` on `lanes`, returns the lanes actually changed.
  std::function<LaneMask<W>(const LaneMask<W>& lanes, Vec& y, const Params& p)> state_map;
};

/// Lanes whose event function changed sign in `direction` between g_old and
/// g_new. A lane starting exactly at zero never triggers (refractory rule).
template <int W>
LaneMask<W> detect_crossing(const LanePack<W>& g_old, const LanePack<W>& g_new, CrossingDirection direction) {
  const LanePack<W> zero{0.0};
  const LaneMask<W> down = (g_old > zero) & (g_new <= zero);
  const LaneMask<W> up = (g_old < zero) & (g_new >= zero);
  switch (direction) {
    case CrossingDirection::positive_to_negative: return down;
    case CrossingDirection::negative_to_positive: return up;
    case CrossingDirection::any: return down | up;
  }
  return LaneMask<W>{false};
}

inline bool detect_crossing(double g_old, double g_new, CrossingDirection direction) {
  LanePack<1> a{g_old}, b{g_new};
  return detect_crossing(a, b, direction)[0];
}

template <int W, int D>
struct EventLocation {
  LanePack<W> dt{0.0};     // offset of the event from the bracket start
  LanePack<W> width{0.0};  // final bracket width
  std::array<LanePack<W>, D> y{};
};

/// Locates, on the lanes in `lanes`, the crossing of `event` inside
/// [state.t, state.t + dt_hi]. `y_hi` is the state at the bracket end and
/// `g_lo` the event function at the bracket start. Each trial re-integrates a
/// single step of the trial length from the bracket start with the same
/// stepper; trial evaluations count toward the lane's RHS counter. Returns the
/// bracket end on the crossed side once the bracket is no wider than the
/// event tolerance. Throws std::invalid_argument if a lane's bracket does not
/// contain a crossing.
template <class Model, int W, int D, int P>
EventLocation<W, D> refine_bisection(StepperKind kind, const Model& model, LaneState<W, D, P>& state,
                                     const LaneMask<W>& lanes, const LanePack<W>& dt_hi,
                                     const typename LaneState<W, D, P>::Vec& y_hi, const LanePack<W>& g_lo,
                                     const EventSpec<W, D, P>& event) {
  using Pack = LanePack<W>;
  const LaneMask<W> bracketed = detect_crossing(g_lo, event.function(state.t + dt_hi, y_hi, state.params), event.direction);
  if ((lanes & ~bracketed).any()) throw std::invalid_argument("invalid bracket");

  EventLocation<W, D> loc;
  loc.dt = dt_hi;
  loc.y = y_hi;
  Pack lo{0.0};
  const Pack tol{event.tolerance};

  for (;;) {
    const LaneMask<W> open = lanes & ((loc.dt - lo) > tol);
    if (open.none()) break;
    const Pack mid = lo + Pack(0.5) * (loc.dt - lo);
    const Pack trial = select(open, mid, dt_hi);

    std::array<StepResult<W, D>, 1> res;
    step(kind, model, std::span(&state, 1), std::span(&trial, 1), std::span(&open, 1), std::span(res.data(), 1));
    const Pack g_mid = event.function(state.t + trial, res[0].y_new, state.params);
    const LaneMask<W> crossed = open & detect_crossing(g_lo, g_mid, event.direction);
    const LaneMask<W> not_crossed = open & ~crossed;

    loc.dt = select(crossed, mid, loc.dt);
    for (int d = 0; d < D; ++d) loc.y[d] = select(crossed, res[0].y_new[d], loc.y[d]);
    lo = select(not_crossed, mid, lo);
  }
  loc.width = loc.dt - lo;
  return loc;
}

/// Newtonian impact on a seat at position zero.
struct ImpactLaw {
  double restitution = 0.8;
  int position = 0;  // state index of the displacement
  int velocity = 1;  // state index of the velocity
};

/// Scalar impact law: position set to zero, velocity reversed and scaled by
/// the restitution coefficient, other components untouched. Throws
/// std::invalid_argument when the velocity is not approaching the seat.
void apply_impact(std::span<double> y, const ImpactLaw& law);

/// Packed impact law on `lanes`. Lanes that reached the seat while already
/// separating (velocity >= 0) are only clamped to the seat. Returns the lanes
/// where the velocity was reversed.
template <int W, std::size_t D>
LaneMask<W> apply_impact(const LaneMask<W>& lanes, std::array<LanePack<W>, D>& y, const ImpactLaw& law) {
  const LanePack<W> zero{0.0};
  const LaneMask<W> approaching = lanes & (y[law.velocity] < zero);
  y[law.position] = select(lanes, zero, y[law.position]);
  y[law.velocity] = select(approaching, -LanePack<W>(law.restitution) * y[law.velocity], y[law.velocity]);
  return approaching;
}

}  // namespace batchode
