#pragma once

// Butcher tableaus of the explicit Runge-Kutta methods. Coefficients are the
// standard published values; `e` holds the exact differences b - b_hat so the
// embedded error estimate is not formed from two separately rounded sums.

#include <array>

namespace batchode {

/// Explicit s-stage tableau. `a` is strictly lower triangular.
template <int S>
struct ButcherTableau {
  static constexpr int stages = S;
  std::array<double, S> c{};
  std::array<std::array<double, S>, S> a{};
  std::array<double, S> b{};
  std::array<double, S> b_hat{};  // embedded lower-order weights
  std::array<double, S> e{};      // b - b_hat
  bool embedded = false;
  int order = 0;
};

namespace tableaus {

inline constexpr ButcherTableau<4> rk4 = {
    .c = {0.0, 0.5, 0.5, 1.0},
    .a = {{{0.0, 0.0, 0.0, 0.0},  //
           {0.5, 0.0, 0.0, 0.0},
           {0.0, 0.5, 0.0, 0.0},
           {0.0, 0.0, 1.0, 0.0}}},
    .b = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
    .b_hat = {},
    .e = {},
    .embedded = false,
    .order = 4,
};

inline constexpr ButcherTableau<6> cash_karp = {
    .c = {0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0},
    .a = {{{0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
           {1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0},
           {3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0},
           {3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0, 0.0},
           {-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0, 0.0},
           {1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0, 253.0 / 4096.0, 0.0}}},
    .b = {37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0},
    .b_hat = {2825.0 / 27648.0, 0.0, 18575.0 / 48384.0, 13525.0 / 55296.0, 277.0 / 14336.0, 1.0 / 4.0},
    .e = {-277.0 / 64512.0, 0.0, 6925.0 / 370944.0, -6925.0 / 202752.0, -277.0 / 14336.0, 277.0 / 7084.0},
    .embedded = true,
    .order = 5,
};

inline constexpr ButcherTableau<7> dormand_prince = {
    .c = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0},
    .a = {{{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
           {1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
           {3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0, 0.0},
           {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0, 0.0},
           {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0, 0.0},
           {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0, 0.0},
           {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0}}},
    .b = {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0},
    .b_hat = {5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0,
              1.0 / 40.0},
    .e = {71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0},
    .embedded = true,
    .order = 5,
};

}  // namespace tableaus

/// Which tableau a stepper runs. Values double as CLI identifiers.
enum class StepperKind { rk4, cash_karp, dormand_prince };

}  // namespace batchode
