#include "batchode/models.hpp"

#include <numbers>
#include <stdexcept>

namespace batchode {

KMCoefficients km_coefficients(const KMPhysical& phys) {
  if (!(phys.frequency1 > 0.0)) throw std::invalid_argument("km_coefficients: f1 must be positive");
  if (!(phys.equilibrium_radius > 0.0))
    throw std::invalid_argument("km_coefficients: equilibrium radius must be positive");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double omega1 = two_pi * phys.frequency1;
  const double omega2 = two_pi * phys.frequency2;
  const double re = phys.equilibrium_radius;
  const double rho = phys.density;
  const double cl = phys.sound_speed;
  const double gamma = phys.polytropic_exponent;

  const double velocity_scale = two_pi / (re * omega1);  // 2*pi / (R_E * omega1)
  const double accel_scale = velocity_scale * velocity_scale;
  const double gas_reference = phys.ambient_pressure - phys.vapour_pressure + 2.0 * phys.surface_tension / re;

  KMCoefficients c{};
  c[0] = gas_reference / rho * accel_scale;
  c[1] = (1.0 - 3.0 * gamma) / (rho * cl) * gas_reference * velocity_scale;
  c[2] = (phys.ambient_pressure - phys.vapour_pressure) / rho * accel_scale;
  c[3] = 2.0 * phys.surface_tension / (rho * re) * accel_scale;
  c[4] = 4.0 * phys.viscosity / (rho * re * re) * (two_pi / omega1);
  c[5] = phys.pressure_amplitude1 / rho * accel_scale;
  c[6] = phys.pressure_amplitude2 / rho * accel_scale;
  c[7] = re * omega1 * phys.pressure_amplitude1 / (rho * cl) * accel_scale;
  c[8] = re * omega1 * phys.pressure_amplitude2 / (rho * cl) * accel_scale;
  c[9] = re * omega1 / (two_pi * cl);
  c[10] = 3.0 * gamma;
  c[11] = omega2 / omega1;
  c[12] = phys.phase_shift;
  return c;
}

}  // namespace batchode
