#pragma once

// Explicit Runge-Kutta steps over a batch group. Stage k of every pack in the
// group is evaluated before stage k+1 of any pack, so the m independent
// dependency chains can overlap in the out-of-order core. Each lane uses its
// own step size.

#include <array>
#include <cassert>
#include <span>
#include <type_traits>

#include "batchode/batch.hpp"
#include "batchode/lane_pack.hpp"
#include "batchode/tableau.hpp"

namespace batchode {

template <int W, int D>
struct StepResult {
  std::array<LanePack<W>, D> y_new{};
  std::array<LanePack<W>, D> err{};  // zero for methods without an embedded pair
  LaneMask<W> finite{true};          // false where a stage or the result is non-finite
  int rhs_evals = 0;                 // added to each counted lane
};

namespace detail {

template <int W, int D, int P>
void count_evals(LaneState<W, D, P>& state, const LaneMask<W>& counted, int evals) {
  for (int i = 0; i < W; ++i)
    if (counted[i]) state.counters[i].rhs_evals += evals;
}

template <int W, int D>
LaneMask<W> all_finite(const std::array<LanePack<W>, D>& a, const std::array<LanePack<W>, D>& b) {
  LaneMask<W> m{true};
  for (int d = 0; d < D; ++d) m &= isfinite(a[d]) & isfinite(b[d]);
  return m;
}

}  // namespace detail

/// One attempt of the tableau `Tab` on every pack of `states`, with per-lane
/// step sizes `dt` (one pack per state). Lanes set in `counted` get the stage
/// count added to their RHS-evaluation counter.
template <const auto& Tab, class Model, int W, int D, int P>
void explicit_rk_step(const Model& model, std::span<LaneState<W, D, P>> states, std::span<const LanePack<W>> dt,
                      std::span<const LaneMask<W>> counted, std::span<StepResult<W, D>> out) {
  constexpr int S = std::remove_cvref_t<decltype(Tab)>::stages;
  using Pack = LanePack<W>;
  using Vec = std::array<Pack, D>;
  const int m = static_cast<int>(states.size());
  assert((m <= BatchGroup<W, D, P>::max_unroll));
  assert((dt.size() == states.size() && out.size() == states.size() && counted.size() == states.size()));

  std::array<std::array<Vec, S>, BatchGroup<W, D, P>::max_unroll> k;

  for (int s = 0; s < S; ++s) {
    for (int g = 0; g < m; ++g) {
      const auto& st = states[g];
      Vec ytmp;
      if (s == 0) {
        ytmp = st.y;
      } else {
        for (int d = 0; d < D; ++d) {
          Pack acc{0.0};
          bool started = false;
          for (int j = 0; j < s; ++j) {
            if (Tab.a[s][j] == 0.0) continue;
            const Pack term = Pack(Tab.a[s][j]) * k[g][j][d];
            acc = started ? acc + term : term;
            started = true;
          }
          ytmp[d] = st.y[d] + dt[g] * acc;
        }
      }
      model(st.t + Pack(Tab.c[s]) * dt[g], ytmp, st.params, k[g][s]);
    }
  }

  for (int g = 0; g < m; ++g) {
    auto& res = out[g];
    const auto& st = states[g];
    for (int d = 0; d < D; ++d) {
      Pack acc{0.0};
      bool started = false;
      for (int j = 0; j < S; ++j) {
        if (Tab.b[j] == 0.0) continue;
        const Pack term = Pack(Tab.b[j]) * k[g][j][d];
        acc = started ? acc + term : term;
        started = true;
      }
      res.y_new[d] = st.y[d] + dt[g] * acc;

      if constexpr (Tab.embedded) {
        Pack eacc{0.0};
        started = false;
        for (int j = 0; j < S; ++j) {
          if (Tab.e[j] == 0.0) continue;
          const Pack term = Pack(Tab.e[j]) * k[g][j][d];
          eacc = started ? eacc + term : term;
          started = true;
        }
        res.err[d] = abs(dt[g] * eacc);
      } else {
        res.err[d] = Pack(0.0);
      }
    }
    res.finite = detail::all_finite<W, D>(res.y_new, res.err);
    res.rhs_evals = S;
    detail::count_evals(states[g], counted[g], S);
  }
}

namespace detail {

/// Classic RK4 on `m` packs sharing the same stage structure; writes only the
/// new states. This is the hot loop of the fixed-step benchmarks.
// Same arithmetic as rk4_stages for a single pack, kept in registers.
template <class Model, int W, int D, int P>
inline void rk4_pack(const Model& model, const LanePack<W>& t, const std::array<LanePack<W>, D>& y,
                     const std::array<LanePack<W>, P>& params, const LanePack<W>& dt,
                     std::array<LanePack<W>, D>& y_new) {
  using Pack = LanePack<W>;
  using Vec = std::array<Pack, D>;
  const Pack half_dt = Pack(0.5) * dt;
  const Pack t_half = t + half_dt;
  Vec k, k_sum, y_tmp;
  model(t, y, params, k);
  for (int d = 0; d < D; ++d) {
    k_sum[d] = k[d];
    y_tmp[d] = y[d] + half_dt * k[d];
  }
  model(t_half, y_tmp, params, k);
  for (int d = 0; d < D; ++d) {
    k_sum[d] += Pack(2.0) * k[d];
    y_tmp[d] = y[d] + half_dt * k[d];
  }
  model(t_half, y_tmp, params, k);
  for (int d = 0; d < D; ++d) {
    k_sum[d] += Pack(2.0) * k[d];
    y_tmp[d] = y[d] + dt * k[d];
  }
  model(t + dt, y_tmp, params, k);
  const Pack sixth_dt = dt * Pack(1.0 / 6.0);
  for (int d = 0; d < D; ++d) {
    k_sum[d] += k[d];
    y_new[d] = y[d] + sixth_dt * k_sum[d];
  }
}

template <class Model, int W, int D, int P>
void rk4_stages(const Model& model, std::span<const LaneState<W, D, P>> states,
                std::span<const LanePack<W>> dt, std::span<std::array<LanePack<W>, D>> y_new) {
  using Pack = LanePack<W>;
  using Vec = std::array<Pack, D>;
  constexpr int max_m = BatchGroup<W, D, P>::max_unroll;
  const int m = static_cast<int>(states.size());

  std::array<Vec, max_m> k_sum;
  std::array<Vec, max_m> k_act;
  std::array<Vec, max_m> y_tmp;
  std::array<Pack, max_m> half_dt;
  std::array<Pack, max_m> t_half;

  for (int g = 0; g < m; ++g) {
    half_dt[g] = Pack(0.5) * dt[g];
    t_half[g] = states[g].t + half_dt[g];
  }

  // k1
  for (int g = 0; g < m; ++g) {
    model(states[g].t, states[g].y, states[g].params, k_act[g]);
    for (int d = 0; d < D; ++d) {
      k_sum[g][d] = k_act[g][d];
      y_tmp[g][d] = states[g].y[d] + half_dt[g] * k_act[g][d];
    }
  }
  // k2
  for (int g = 0; g < m; ++g) {
    model(t_half[g], y_tmp[g], states[g].params, k_act[g]);
    for (int d = 0; d < D; ++d) {
      k_sum[g][d] += Pack(2.0) * k_act[g][d];
      y_tmp[g][d] = states[g].y[d] + half_dt[g] * k_act[g][d];
    }
  }
  // k3
  for (int g = 0; g < m; ++g) {
    model(t_half[g], y_tmp[g], states[g].params, k_act[g]);
    for (int d = 0; d < D; ++d) {
      k_sum[g][d] += Pack(2.0) * k_act[g][d];
      y_tmp[g][d] = states[g].y[d] + dt[g] * k_act[g][d];
    }
  }
  // k4
  for (int g = 0; g < m; ++g) {
    model(states[g].t + dt[g], y_tmp[g], states[g].params, k_act[g]);
    const Pack sixth_dt = dt[g] * Pack(1.0 / 6.0);
    for (int d = 0; d < D; ++d) {
      k_sum[g][d] += k_act[g][d];
      y_new[g][d] = states[g].y[d] + sixth_dt * k_sum[g][d];
    }
  }
}

}  // namespace detail

/// Classic fourth-order step: y + dt/6 (k1 + 2 k2 + 2 k3 + k4). No error estimate.
template <class Model, int W, int D, int P>
void rk4_step(const Model& model, std::span<LaneState<W, D, P>> states, std::span<const LanePack<W>> dt,
              std::span<const LaneMask<W>> counted, std::span<StepResult<W, D>> out) {
  constexpr int max_m = BatchGroup<W, D, P>::max_unroll;
  const int m = static_cast<int>(states.size());
  std::array<std::array<LanePack<W>, D>, max_m> y_new;
  detail::rk4_stages<Model, W, D, P>(model, states, dt, std::span(y_new.data(), m));
  for (int g = 0; g < m; ++g) {
    out[g].y_new = y_new[g];
    for (auto& e : out[g].err) e = LanePack<W>(0.0);
    out[g].finite = detail::all_finite<W, D>(out[g].y_new, out[g].y_new);
    out[g].rhs_evals = 4;
    detail::count_evals(states[g], counted[g], 4);
  }
}

template <class Model, int W, int D, int P>
void cash_karp_step(const Model& model, std::span<LaneState<W, D, P>> states, std::span<const LanePack<W>> dt,
                    std::span<const LaneMask<W>> counted, std::span<StepResult<W, D>> out) {
  explicit_rk_step<tableaus::cash_karp>(model, states, dt, counted, out);
}

/// Dormand-Prince 5(4). All seven stages are evaluated on every attempt.
template <class Model, int W, int D, int P>
void dormand_prince_step(const Model& model, std::span<LaneState<W, D, P>> states,
                         std::span<const LanePack<W>> dt, std::span<const LaneMask<W>> counted,
                         std::span<StepResult<W, D>> out) {
  explicit_rk_step<tableaus::dormand_prince>(model, states, dt, counted, out);
}

/// Dispatches on a runtime stepper choice.
template <class Model, int W, int D, int P>
void step(StepperKind kind, const Model& model, std::span<LaneState<W, D, P>> states,
          std::span<const LanePack<W>> dt, std::span<const LaneMask<W>> counted, std::span<StepResult<W, D>> out) {
  switch (kind) {
    case StepperKind::rk4: rk4_step(model, states, dt, counted, out); return;
    case StepperKind::cash_karp: cash_karp_step(model, states, dt, counted, out); return;
    case StepperKind::dormand_prince: dormand_prince_step(model, states, dt, counted, out); return;
  }
}

constexpr int stage_count(StepperKind kind) {
  switch (kind) {
    case StepperKind::rk4: return tableaus::rk4.stages;
    case StepperKind::cash_karp: return tableaus::cash_karp.stages;
    case StepperKind::dormand_prince: return tableaus::dormand_prince.stages;
  }
  return 0;
}

}  // namespace batchode
