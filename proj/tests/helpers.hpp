#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <algorithm>
#include <vector>

#include "batchode/batch.hpp"
#include "batchode/models.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline std::int64_t ulp_distance(double a, double b) {
  std::int64_t ia, ib;
  std::memcpy(&ia, &a, sizeof a);
  std::memcpy(&ib, &b, sizeof b);
  if (ia < 0) ia = std::numeric_limits<std::int64_t>::min() - ia;
  if (ib < 0) ib = std::numeric_limits<std::int64_t>::min() - ib;
  return ia > ib ? ia - ib : ib - ia;
}

inline bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

/// Wraps a model and counts how many lanes it was evaluated on, independently
/// of the solver's own counters. Not thread safe.
template <class Model>
struct CountingModel {
  static constexpr int dim = Model::dim;
  static constexpr int n_params = Model::n_params;
  static constexpr batchode::LaneStatus failure_status = Model::failure_status;

  Model inner{};
  std::int64_t* calls = nullptr;  // one increment per pack evaluation

  template <class Pack>
  void operator()(const Pack& t, const std::array<Pack, dim>& y, const std::array<Pack, n_params>& p,
                  std::array<Pack, dim>& dy) const {
    ++*calls;
    inner(t, y, p, dy);
  }
};

/// Plain scalar RK4 step, written out independently of the library.
template <class F, std::size_t D>
std::array<double, D> scalar_rk4(F f, double t, const std::array<double, D>& y, double h) {
  std::array<double, D> k1, k2, k3, k4, tmp;
  f(t, y, k1);
  for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  f(t + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  f(t + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * k3[i];
  f(t + h, tmp, k4);
  std::array<double, D> out;
  for (std::size_t i = 0; i < D; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace testutil
