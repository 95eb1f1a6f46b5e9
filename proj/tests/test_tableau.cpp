#include <array>
#include <cmath>
#include <vector>

#include "batchode/steppers.hpp"
#include "batchode/tableau.hpp"
#include "doctest.h"

using namespace batchode;

namespace {

using Vec = std::vector<double>;

template <int S>
struct TreeCheck {
  const ButcherTableau<S>& tab;

  Vec c() const { return Vec(tab.c.begin(), tab.c.end()); }
  Vec mul_a(const Vec& v) const {
    Vec r(S, 0.0);
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < S; ++j) r[i] += tab.a[i][j] * v[j];
    return r;
  }
  static Vec hadamard(const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] * y[i];
    return r;
  }
  static Vec ones() { return Vec(S, 1.0); }
  static double dot(const std::array<double, S>& w, const Vec& v) {
    double s = 0.0;
    for (int i = 0; i < S; ++i) s += w[i] * v[i];
    return s;
  }

  // Elementary weights of all rooted trees up to `order`, paired with 1/gamma.
  std::vector<std::pair<double, double>> conditions(const std::array<double, S>& w, int order) const {
    const Vec C = c();
    const Vec C2 = hadamard(C, C), C3 = hadamard(C2, C), C4 = hadamard(C3, C);
    const Vec AC = mul_a(C), AC2 = mul_a(C2), AAC = mul_a(AC);
    std::vector<std::pair<double, double>> out{{dot(w, ones()), 1.0}};
    if (order >= 2) out.push_back({dot(w, C), 1.0 / 2});
    if (order >= 3) {
      out.push_back({dot(w, C2), 1.0 / 3});
      out.push_back({dot(w, AC), 1.0 / 6});
    }
    if (order >= 4) {
      out.push_back({dot(w, C3), 1.0 / 4});
      out.push_back({dot(w, hadamard(C, AC)), 1.0 / 8});
      out.push_back({dot(w, AC2), 1.0 / 12});
      out.push_back({dot(w, AAC), 1.0 / 24});
    }
    if (order >= 5) {
      out.push_back({dot(w, C4), 1.0 / 5});
      out.push_back({dot(w, hadamard(C2, AC)), 1.0 / 10});
      out.push_back({dot(w, hadamard(C, AC2)), 1.0 / 15});
      out.push_back({dot(w, hadamard(C, AAC)), 1.0 / 30});
      out.push_back({dot(w, hadamard(AC, AC)), 1.0 / 20});
      out.push_back({dot(w, mul_a(C3)), 1.0 / 20});
      out.push_back({dot(w, mul_a(hadamard(C, AC))), 1.0 / 40});
      out.push_back({dot(w, mul_a(AC2)), 1.0 / 60});
      out.push_back({dot(w, mul_a(AAC)), 1.0 / 120});
    }
    return out;
  }
};

template <int S>
void check_consistency(const ButcherTableau<S>& tab) {
  for (int i = 0; i < S; ++i) {
    double row = 0.0;
    for (int j = 0; j < S; ++j) {
      row += tab.a[i][j];
      if (j >= i) CHECK(tab.a[i][j] == 0.0);
    }
    CHECK(row == doctest::Approx(tab.c[i]).epsilon(1e-15));
  }
}

template <int S>
void check_order(const ButcherTableau<S>& tab, const decltype(ButcherTableau<S>::b)& w, int order) {
  TreeCheck<S> t{tab};
  for (const auto& [phi, target] : t.conditions(w, order)) CHECK(phi == doctest::Approx(target).epsilon(1e-14));
}

}  // namespace

TEST_CASE("RK4 satisfies the fourth-order conditions") {
  check_consistency(tableaus::rk4);
  check_order(tableaus::rk4, tableaus::rk4.b, 4);
  CHECK_FALSE(tableaus::rk4.embedded);
  CHECK(stage_count(StepperKind::rk4) == 4);
}

TEST_CASE("Cash-Karp pair: fifth-order solution, fourth-order embedded solution") {
  const auto& t = tableaus::cash_karp;
  check_consistency(t);
  check_order(t, t.b, 5);
  check_order(t, t.b_hat, 4);
  for (int i = 0; i < 6; ++i) CHECK(t.e[i] == doctest::Approx(t.b[i] - t.b_hat[i]).epsilon(1e-15).scale(1.0));
  CHECK(stage_count(StepperKind::cash_karp) == 6);
}

TEST_CASE("Dormand-Prince pair: fifth-order solution, fourth-order embedded solution") {
  const auto& t = tableaus::dormand_prince;
  check_consistency(t);
  check_order(t, t.b, 5);
  check_order(t, t.b_hat, 4);
  for (int i = 0; i < 7; ++i) CHECK(t.e[i] == doctest::Approx(t.b[i] - t.b_hat[i]).epsilon(1e-15).scale(1.0));
  // First-same-as-last structure: the last stage is evaluated at the new solution.
  for (int j = 0; j < 7; ++j) CHECK(t.a[6][j] == t.b[j]);
  CHECK(stage_count(StepperKind::dormand_prince) == 7);
}

TEST_CASE("embedded weights are not fifth order") {
  // Sanity check on the checker itself: a fourth-order weight vector must
  // violate at least one fifth-order condition.
  TreeCheck<6> t{tableaus::cash_karp};
  bool violated = false;
  for (const auto& [phi, target] : t.conditions(tableaus::cash_karp.b_hat, 5))
    if (std::abs(phi - target) > 1e-10) violated = true;
  CHECK(violated);
}
