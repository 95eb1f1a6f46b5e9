#include "batchode/batch.hpp"

#include <cmath>
#include <stdexcept>

namespace batchode {

std::string_view to_string(LaneStatus status) {
  switch (status) {
    case LaneStatus::ok: return "ok";
    case LaneStatus::padding: return "padding";
    case LaneStatus::non_finite_state: return "non-finite state";
    case LaneStatus::collapse_singularity: return "collapse singularity";
    case LaneStatus::negative_chamber_pressure: return "negative chamber pressure";
    case LaneStatus::step_size_underflow: return "step-size underflow";
    case LaneStatus::step_budget_exhausted: return "step budget exhausted";
    case LaneStatus::no_phase_end_event: return "no phase-end event";
    case LaneStatus::possible_chatter: return "possible chatter";
  }
  return "unknown";
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace: need at least 2 points");
  if (!(b > a)) throw std::invalid_argument("linspace: upper bound must exceed lower bound");
  std::vector<double> out(n);
  const double step = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + static_cast<double>(i) * step;
  out.back() = b;
  return out;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  if (!(a > 0.0)) throw std::invalid_argument("logspace: lower bound must be positive");
  if (n < 2) throw std::invalid_argument("logspace: need at least 2 points");
  if (!(b > a)) throw std::invalid_argument("logspace: upper bound must exceed lower bound");
  std::vector<double> out(n);
  const double ratio = b / a;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = a * std::pow(ratio, static_cast<double>(i) / denom);
  out.front() = a;
  out.back() = b;
  return out;
}

namespace detail {
void check_nonempty_ensemble(std::size_t n) {
  if (n == 0) throw std::invalid_argument("empty ensemble");
}
}  // namespace detail

}  // namespace batchode
