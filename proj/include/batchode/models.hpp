#pragma once

// Right-hand sides of the benchmark systems. Every RHS is a template over the
// number type so the same code runs on doubles and on lane packs.
//
// A model type exposes `dim`, `n_params`, `failure_status` (reported when a
// lane produces non-finite derivatives) and
//   void operator()(const Pack& t, const std::array<Pack, dim>& y,
//                   const std::array<Pack, n_params>& p,
//                   std::array<Pack, dim>& dy) const;

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>

#include "batchode/batch.hpp"
#include "batchode/lane_pack.hpp"

namespace batchode {

namespace detail {

#ifdef BATCHODE_COUNT_OPS
struct OpCounters {
  std::int64_t reciprocals = 0;
};
inline OpCounters& op_counters() {
  thread_local OpCounters counters;
  return counters;
}
#endif

template <class T>
T reciprocal(const T& x) {
#ifdef BATCHODE_COUNT_OPS
  ++op_counters().reciprocals;
#endif
  return T(1.0) / x;
}

inline void sincos(double x, double& s, double& c) {
  s = lane_sin(x);
  c = lane_cos(x);
}

inline double select(bool m, double a, double b) { return m ? a : b; }

}  // namespace detail

template <class Model>
concept OdeModel = requires {
  { Model::dim } -> std::convertible_to<int>;
  { Model::n_params } -> std::convertible_to<int>;
  { Model::failure_status } -> std::convertible_to<LaneStatus>;
};

// ---------------------------------------------------------------------------
// Introductory one-dimensional systems.

/// x' = x^2 - p, as a single fused multiply-add.
template <class T>
T intro_rhs(const T& x, const T& p) {
  using std::fma;
  return fma(x, x, -p);
}

/// x' = 1/x - p*x.
template <class T>
T intro_div_rhs(const T& x, const T& p) {
  return T(1.0) / x - p * x;
}

/// x' = p*sin(x).
template <class T>
T intro_sin_rhs(const T& x, const T& p) {
  using std::sin;
  return p * sin(x);
}

enum class IntroVariant { square, division, sine };

template <IntroVariant V>
struct IntroModel {
  static constexpr int dim = 1;
  static constexpr int n_params = 1;
  static constexpr LaneStatus failure_status = LaneStatus::non_finite_state;

  template <class Pack>
  void operator()(const Pack& /*t*/, const std::array<Pack, 1>& y, const std::array<Pack, 1>& p,
                  std::array<Pack, 1>& dy) const {
    if constexpr (V == IntroVariant::square) {
      dy[0] = intro_rhs(y[0], p[0]);
    } else if constexpr (V == IntroVariant::division) {
      dy[0] = intro_div_rhs(y[0], p[0]);
    } else {
      dy[0] = intro_sin_rhs(y[0], p[0]);
    }
  }
};

using IntroSquareModel = IntroModel<IntroVariant::square>;
using IntroDivisionModel = IntroModel<IntroVariant::division>;
using IntroSineModel = IntroModel<IntroVariant::sine>;

// ---------------------------------------------------------------------------
// Lorenz system with fixed sigma = 10 and b = 2.666.

inline constexpr double lorenz_sigma = 10.0;
inline constexpr double lorenz_b = 2.666;

template <class T>
void lorenz_rhs(const T& x1, const T& x2, const T& x3, const T& p, T& dx1, T& dx2, T& dx3) {
  dx1 = T(lorenz_sigma) * (x2 - x1);
  dx2 = p * x1 - x2 - x1 * x3;
  dx3 = x1 * x2 - T(lorenz_b) * x3;
}

struct LorenzModel {
  static constexpr int dim = 3;
  static constexpr int n_params = 1;
  static constexpr LaneStatus failure_status = LaneStatus::non_finite_state;

  template <class Pack>
  void operator()(const Pack& /*t*/, const std::array<Pack, 3>& y, const std::array<Pack, 1>& p,
                  std::array<Pack, 3>& dy) const {
    lorenz_rhs(y[0], y[1], y[2], p[0], dy[0], dy[1], dy[2]);
  }
};

// ---------------------------------------------------------------------------
// Keller-Miksis bubble model in dimensionless form.

/// Physical setup of a single driven bubble. SI units.
struct KMPhysical {
  double pressure_amplitude1 = 1.5e5;  // P_A1 [Pa]
  double pressure_amplitude2 = 0.0;    // P_A2 [Pa]
  double frequency1 = 20.0e3;          // f1 [Hz]
  double frequency2 = 0.0;             // f2 [Hz]
  double phase_shift = 0.0;            // theta [rad]
  double equilibrium_radius = 10.0e-6; // R_E [m]

  double sound_speed = 1497.3;         // c_L [m/s]
  double density = 997.1;              // rho_L [kg/m^3]
  double ambient_pressure = 1.0e5;     // P_inf [Pa]
  double vapour_pressure = 3166.8;     // p_V [Pa]
  double surface_tension = 0.072;      // sigma [N/m]
  double viscosity = 8.902e-4;         // mu_L [Pa s]
  double polytropic_exponent = 1.4;    // gamma
};

/// The thirteen precomputed coefficients C0..C12 of the dimensionless system.
using KMCoefficients = std::array<double, 13>;

/// Throws std::invalid_argument for non-physical input (f1 <= 0, R_E <= 0).
KMCoefficients km_coefficients(const KMPhysical& phys);

/// Dimensionless Keller-Miksis right-hand side. `c` holds C0..C12 (doubles or
/// packs). Lanes with y1 <= 0 or a vanishing denominator get a NaN dy2.
template <class T, class Coeffs>
void km_rhs(const T& y1, const T& y2, const T& tau, const Coeffs& c, T& dy1, T& dy2) {
  using detail::select;
  using std::pow;
  using std::abs;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  const T rx1 = detail::reciprocal(y1);
  const T gas = pow(rx1, c[10]);

  T s1, c1, s2, c2;
  using detail::sincos;
  sincos(T(two_pi) * tau, s1, c1);
  sincos(T(two_pi) * c[11] * tau + c[12], s2, c2);

  const T one_c9y2 = T(1.0) + c[9] * y2;
  const T numerator = (c[0] + c[1] * y2) * gas        //
                      - c[2] * one_c9y2               //
                      - c[3] * rx1                    //
                      - c[4] * y2 * rx1               //
                      - (T(1.0) - c[9] * y2 * T(1.0 / 3.0)) * T(1.5) * y2 * y2  //
                      - (c[5] * s1 + c[6] * s2) * one_c9y2                      //
                      - y1 * (c[7] * c1 + c[8] * c2);
  const T denominator = y1 - c[9] * y1 * y2 + c[4] * c[9];

  const auto singular = (y1 <= T(0.0)) | (abs(denominator) < T(1e-300));
  dy1 = y2;
  dy2 = select(singular, T(std::numeric_limits<double>::quiet_NaN()), numerator / denominator);
}

struct KellerMiksisModel {
  static constexpr int dim = 2;
  static constexpr int n_params = 13;
  static constexpr LaneStatus failure_status = LaneStatus::collapse_singularity;

  template <class Pack>
  void operator()(const Pack& tau, const std::array<Pack, 2>& y, const std::array<Pack, 13>& c,
                  std::array<Pack, 2>& dy) const {
    km_rhs(y[0], y[1], tau, c, dy[0], dy[1]);
  }
};

// ---------------------------------------------------------------------------
// Pressure relief valve.

struct ValveParams {
  double damping = 1.25;           // kappa
  double precompression = 10.0;    // delta
  double compressibility = 20.0;   // beta
  double restitution = 0.8;        // r
};

/// Negative chamber pressures no smaller than this are treated as roundoff.
inline constexpr double valve_pressure_roundoff = 1e-12;

template <class T>
void valve_rhs(const T& y1, const T& y2, const T& y3, const T& q, const ValveParams& vp, T& dy1, T& dy2,
               T& dy3) {
  using detail::select;
  using std::sqrt;
  const auto roundoff = (y3 < T(0.0)) & (y3 > T(-valve_pressure_roundoff));
  const T pressure = select(roundoff, T(0.0), y3);
  dy1 = y2;
  dy2 = -T(vp.damping) * y2 - (y1 + T(vp.precompression)) + y3;
  dy3 = T(vp.compressibility) * (q - y1 * sqrt(pressure));
}

struct ValveModel {
  static constexpr int dim = 3;
  static constexpr int n_params = 1;
  static constexpr LaneStatus failure_status = LaneStatus::negative_chamber_pressure;

  ValveParams constants{};

  template <class Pack>
  void operator()(const Pack& /*t*/, const std::array<Pack, 3>& y, const std::array<Pack, 1>& q,
                  std::array<Pack, 3>& dy) const {
    valve_rhs(y[0], y[1], y[2], q[0], constants, dy[0], dy[1], dy[2]);
  }
};

}  // namespace batchode
