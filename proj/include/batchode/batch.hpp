#pragma once

// Ensemble data layout: per-lane integration state, unrolled batch groups
// and the parameter-sweep generators that feed them.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "batchode/lane_pack.hpp"

namespace batchode {

/// Why a lane stopped participating. Anything but `ok` is terminal.
enum class LaneStatus : std::uint8_t {
  ok = 0,
  padding,  // filler lane appended to complete the last pack
  non_finite_state,
  collapse_singularity,
  negative_chamber_pressure,
  step_size_underflow,
  step_budget_exhausted,
  no_phase_end_event,
  possible_chatter,
};

std::string_view to_string(LaneStatus status);

/// True for statuses that represent a solver failure (padding is not one).
constexpr bool is_failure(LaneStatus s) { return s != LaneStatus::ok && s != LaneStatus::padding; }

struct LaneCounters {
  std::int64_t rhs_evals = 0;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t events = 0;

  friend bool operator==(const LaneCounters&, const LaneCounters&) = default;
};

/// Integration state of one pack of W instances of a D-dimensional system
/// with P parameters. Time and step size are per lane; lanes never share a
/// step.
template <int W, int D, int P>
struct LaneState {
  using Pack = LanePack<W>;
  using Mask = LaneMask<W>;
  using Vec = std::array<Pack, D>;
  using Params = std::array<Pack, P>;
  static constexpr int width = W;
  static constexpr int dim = D;
  static constexpr int n_params = P;

  Pack t{0.0};
  Pack dt{0.0};
  Vec y{};
  Params params{};
  Mask active{true};
  std::array<LaneStatus, W> status{};
  std::array<LaneCounters, W> counters{};

  /// Deactivates the lanes in `lanes` and records why.
  void fail(const Mask& lanes, LaneStatus why) {
    for (int i = 0; i < W; ++i) {
      if (lanes[i] && active[i]) {
        status[i] = why;
        active.set(i, false);
      }
    }
  }
};

/// m lane packs that advance together, interleaved at Runge-Kutta stage
/// granularity. All members share one model and one integrator setup.
template <int W, int D, int P>
struct BatchGroup {
  using State = LaneState<W, D, P>;
  static constexpr int max_unroll = 16;

  std::vector<State> states;

  int unroll() const { return static_cast<int>(states.size()); }
  bool any_active() const {
    for (const auto& s : states)
      if (s.active.any()) return true;
    return false;
  }
};

/// `n` evenly spaced values from `a` to `b` inclusive.
std::vector<double> linspace(double a, double b, std::size_t n);

/// `n` geometrically spaced values from `a` to `b` inclusive.
std::vector<double> logspace(double a, double b, std::size_t n);

template <int W>
struct PackedValues {
  std::vector<LanePack<W>> packs;
  std::vector<LaneMask<W>> valid;  // false on padding lanes
};

namespace detail {
void check_nonempty_ensemble(std::size_t n);
}

/// Lays `values` out lane-major into packs of W. A short final pack is filled
/// by repeating the last value; those lanes are marked invalid.
template <int W>
PackedValues<W> pack_parameters(std::span<const double> values) {
  detail::check_nonempty_ensemble(values.size());
  const std::size_t n_packs = (values.size() + W - 1) / W;
  PackedValues<W> out;
  out.packs.resize(n_packs);
  out.valid.resize(n_packs);
  for (std::size_t k = 0; k < n_packs; ++k) {
    for (int i = 0; i < W; ++i) {
      const std::size_t idx = k * W + static_cast<std::size_t>(i);
      const bool real = idx < values.size();
      out.packs[k].set(i, real ? values[idx] : values.back());
      out.valid[k].set(i, real);
    }
  }
  return out;
}

}  // namespace batchode
