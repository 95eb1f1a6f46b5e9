#include "batchode/lane_pack.hpp"

#include <cmath>

namespace batchode::detail {

__attribute__((noinline)) double lane_sin(double x) { return std::sin(x); }
__attribute__((noinline)) double lane_cos(double x) { return std::cos(x); }

}  // namespace batchode::detail
