#include "batchode/events.hpp"

#include <stdexcept>

namespace batchode {

void apply_impact(std::span<double> y, const ImpactLaw& law) {
  const auto pos = static_cast<std::size_t>(law.position);
  const auto vel = static_cast<std::size_t>(law.velocity);
  if (pos >= y.size() || vel >= y.size()) throw std::invalid_argument("impact law: state index out of range");
  if (!(y[vel] < 0.0)) throw std::invalid_argument("impact law on separating contact");
  y[pos] = 0.0;
  y[vel] = -law.restitution * y[vel];
}

}  // namespace batchode
