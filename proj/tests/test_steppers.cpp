#include <array>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "batchode/ensemble.hpp"
#include "batchode/steppers.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace batchode;
using Real = boost::multiprecision::cpp_bin_float_50;

namespace {

// y' = p * y
struct LinearModel {
  static constexpr int dim = 1;
  static constexpr int n_params = 1;
  static constexpr LaneStatus failure_status = LaneStatus::non_finite_state;
  template <class Pack>
  void operator()(const Pack&, const std::array<Pack, 1>& y, const std::array<Pack, 1>& p,
                  std::array<Pack, 1>& dy) const {
    dy[0] = p[0] * y[0];
  }
};

// y' = 3t^2 + 2t + 1, whose solution is a cubic.
struct CubicModel {
  static constexpr int dim = 1;
  static constexpr int n_params = 1;
  static constexpr LaneStatus failure_status = LaneStatus::non_finite_state;
  template <class Pack>
  void operator()(const Pack& t, const std::array<Pack, 1>&, const std::array<Pack, 1>&,
                  std::array<Pack, 1>& dy) const {
    dy[0] = Pack(3.0) * t * t + Pack(2.0) * t + Pack(1.0);
  }
};

struct Frac {
  long long num, den;
};

// Coefficients retyped as exact fractions for the high-precision oracle.
struct RationalTableau {
  int stages;
  std::vector<std::vector<Frac>> a;
  std::vector<Frac> b, b_hat;
};

const RationalTableau ck_exact{
    6,
    {{},
     {{1, 5}},
     {{3, 40}, {9, 40}},
     {{3, 10}, {-9, 10}, {6, 5}},
     {{-11, 54}, {5, 2}, {-70, 27}, {35, 27}},
     {{1631, 55296}, {175, 512}, {575, 13824}, {44275, 110592}, {253, 4096}}},
    {{37, 378}, {0, 1}, {250, 621}, {125, 594}, {0, 1}, {512, 1771}},
    {{2825, 27648}, {0, 1}, {18575, 48384}, {13525, 55296}, {277, 14336}, {1, 4}}};

const RationalTableau dp_exact{
    7,
    {{},
     {{1, 5}},
     {{3, 40}, {9, 40}},
     {{44, 45}, {-56, 15}, {32, 9}},
     {{19372, 6561}, {-25360, 2187}, {64448, 6561}, {-212, 729}},
     {{9017, 3168}, {-355, 33}, {46732, 5247}, {49, 176}, {-5103, 18656}},
     {{35, 384}, {0, 1}, {500, 1113}, {125, 192}, {-2187, 6784}, {11, 84}}},
    {{35, 384}, {0, 1}, {500, 1113}, {125, 192}, {-2187, 6784}, {11, 84}, {0, 1}},
    {{5179, 57600}, {0, 1}, {7571, 16695}, {393, 640}, {-92097, 339200}, {187, 2100}, {1, 40}}};

Real frac(const Frac& f) { return Real(f.num) / Real(f.den); }

// One step of y' = lambda y from y = 1 in 50-digit arithmetic: returns
// (higher-order solution, |solution difference|).
std::pair<Real, Real> exact_linear_step(const RationalTableau& t, Real z) {
  std::vector<Real> k(t.stages);
  for (int s = 0; s < t.stages; ++s) {
    Real y = 1;
    for (std::size_t j = 0; j < t.a[s].size(); ++j) y += frac(t.a[s][j]) * k[j];
    k[s] = z * y;
  }
  Real hi = 1, lo = 1;
  for (int s = 0; s < t.stages; ++s) {
    hi += frac(t.b[s]) * k[s];
    lo += frac(t.b_hat[s]) * k[s];
  }
  return {hi, abs(hi - lo)};
}

template <int W, class Model>
StepResult<W, Model::dim> one_step(StepperKind kind, const Model& model, LaneState<W, Model::dim, Model::n_params>& st,
                                   const LanePack<W>& dt) {
  std::array<StepResult<W, Model::dim>, 1> out;
  const LaneMask<W> counted{true};
  step(kind, model, std::span(&st, 1), std::span(&dt, 1), std::span(&counted, 1), std::span(out.data(), 1));
  return out[0];
}

double solve_fixed(StepperKind kind, int n_steps) {
  LaneState<1, 1, 1> st;
  st.y[0] = LanePack<1>(1.0);
  st.params[0] = LanePack<1>(1.0);
  const LanePack<1> dt{1.0 / n_steps};
  for (int i = 0; i < n_steps; ++i) {
    const auto r = one_step(kind, LinearModel{}, st, dt);
    st.y = r.y_new;
    st.t = st.t + dt;
  }
  return std::abs(st.y[0][0] - std::exp(1.0));
}

}  // namespace

TEST_CASE("linear test equation against a 50-digit oracle") {
  const std::vector<double> lambdas{-3.0, -0.7, 0.4, 2.5};
  for (const auto& [kind, tab] : {std::pair{StepperKind::cash_karp, &ck_exact}, std::pair{StepperKind::dormand_prince, &dp_exact}}) {
    LaneState<4, 1, 1> st;
    LanePack<4> dt;
    for (int i = 0; i < 4; ++i) {
      st.y[0].set(i, 1.0);
      st.params[0].set(i, lambdas[i]);
      dt.set(i, 0.05 * (i + 1));  // each lane has its own step size
    }
    const auto r = one_step(kind, LinearModel{}, st, dt);
    for (int i = 0; i < 4; ++i) {
      const auto [hi, err] = exact_linear_step(*tab, Real(lambdas[i]) * Real(dt[i]));
      CHECK(testutil::rel_err(r.y_new[0][i], static_cast<double>(hi)) <= 1e-15);
      CHECK(std::abs(r.err[0][i] - static_cast<double>(err)) <= 1e-15 * std::abs(r.y_new[0][i]));
    }
  }
}

TEST_CASE("RK4 reproduces the degree-four Taylor polynomial on y' = lambda y") {
  LaneState<2, 1, 1> st;
  st.y[0] = LanePack<2>(1.0);
  st.params[0].set(0, -1.5);
  st.params[0].set(1, 0.8);
  const LanePack<2> dt{0.1};
  const auto r = one_step(StepperKind::rk4, LinearModel{}, st, dt);
  for (int i = 0; i < 2; ++i) {
    const double z = st.params[0][i] * 0.1;
    const double expected = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
    CHECK(testutil::rel_err(r.y_new[0][i], expected) <= 4e-16);
    CHECK(r.err[0][i] == 0.0);
  }
}

TEST_CASE("measured convergence order on y' = y over [0, 1]") {
  struct Case {
    StepperKind kind;
    double order;
  };
  for (const Case c : {Case{StepperKind::rk4, 4.0}, Case{StepperKind::cash_karp, 5.0}, Case{StepperKind::dormand_prince, 5.0}}) {
    const double e1 = solve_fixed(c.kind, 8);
    const double e2 = solve_fixed(c.kind, 16);
    const double measured = std::log2(e1 / e2);
    CAPTURE(to_string(c.kind));
    CAPTURE(measured);
    CHECK(std::abs(measured - c.order) <= 0.2);
  }
}

TEST_CASE("cubic solutions are integrated exactly by every pair") {
  for (const auto kind : {StepperKind::cash_karp, StepperKind::dormand_prince, StepperKind::rk4}) {
    LaneState<4, 1, 1> st;
    LanePack<4> dt;
    for (int i = 0; i < 4; ++i) {
      st.t.set(i, 0.25 * i);
      st.y[0].set(i, 1.0 + i);
      dt.set(i, 0.1 + 0.2 * i);
    }
    const auto r = one_step(kind, CubicModel{}, st, dt);
    for (int i = 0; i < 4; ++i) {
      const double t0 = st.t[i], t1 = t0 + dt[i];
      const auto f = [](double t) { return t * t * t + t * t + t; };
      CHECK(r.err[0][i] <= 1e-14);
      CHECK(std::abs(r.y_new[0][i] - (st.y[0][i] + f(t1) - f(t0))) <= 1e-14);
    }
  }
}

TEST_CASE("stage interleaving over a group does not change any lane") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr int m = 5;
  std::vector<LaneState<4, 3, 1>> states(m);
  std::array<LanePack<4>, m> dts;
  std::array<LaneMask<4>, m> counted;
  for (int g = 0; g < m; ++g) {
    for (int i = 0; i < 4; ++i) {
      for (int d = 0; d < 3; ++d) states[g].y[d].set(i, 10.0 * u(rng));
      states[g].params[0].set(i, 10.0 + 10.0 * u(rng));
      dts[g].set(i, 0.01 * (1.0 + u(rng)));
    }
    counted[g] = LaneMask<4>{true};
  }
  for (const auto kind : {StepperKind::rk4, StepperKind::cash_karp, StepperKind::dormand_prince}) {
    std::array<StepResult<4, 3>, m> together;
    auto copy = states;
    step(kind, LorenzModel{}, std::span(copy.data(), m), std::span<const LanePack<4>>(dts.data(), m),
         std::span<const LaneMask<4>>(counted.data(), m), std::span(together.data(), m));
    for (int g = 0; g < m; ++g) {
      auto single_state = states[g];
      const auto alone = one_step(kind, LorenzModel{}, single_state, dts[g]);
      for (int d = 0; d < 3; ++d)
        for (int i = 0; i < 4; ++i) {
          CHECK(testutil::bitwise_equal(together[g].y_new[d][i], alone.y_new[d][i]));
          CHECK(testutil::bitwise_equal(together[g].err[d][i], alone.err[d][i]));
        }
    }
  }
}

TEST_CASE("RHS evaluations are charged to counted lanes only") {
  LaneState<4, 1, 1> st;
  st.y[0] = LanePack<4>(1.0);
  st.params[0] = LanePack<4>(-1.0);
  LaneMask<4> mask{true};
  mask.set(2, false);
  const LaneMask<4> counted = mask;
  const LanePack<4> dt{0.1};
  std::array<StepResult<4, 1>, 1> out;
  step(StepperKind::dormand_prince, LinearModel{}, std::span(&st, 1), std::span(&dt, 1), std::span(&counted, 1),
       std::span(out.data(), 1));
  CHECK(st.counters[0].rhs_evals == 7);
  CHECK(st.counters[2].rhs_evals == 0);
  step(StepperKind::cash_karp, LinearModel{}, std::span(&st, 1), std::span(&dt, 1), std::span(&counted, 1),
       std::span(out.data(), 1));
  CHECK(st.counters[0].rhs_evals == 13);
  CHECK(out[0].rhs_evals == 6);
}

TEST_CASE("non-finite stage values are reported per lane") {
  LaneState<2, 1, 1> st;
  st.y[0].set(0, 1.0);
  st.y[0].set(1, 0.0);
  st.params[0] = LanePack<2>(1.0);
  const LanePack<2> dt{0.1};
  const auto r = one_step(StepperKind::rk4, IntroDivisionModel{}, st, dt);
  CHECK(r.finite[0]);
  CHECK_FALSE(r.finite[1]);
}

TEST_CASE("RK4 step agrees with an independent scalar implementation") {
  LaneState<4, 3, 1> st;
  for (int i = 0; i < 4; ++i) {
    st.y[0].set(i, 1.0 + i);
    st.y[1].set(i, 2.0 - i);
    st.y[2].set(i, 3.0 + 0.5 * i);
    st.params[0].set(i, 7.0 * i);
  }
  const LanePack<4> dt{0.01};
  const auto r = one_step(StepperKind::rk4, LorenzModel{}, st, dt);
  for (int i = 0; i < 4; ++i) {
    const double p = st.params[0][i];
    auto f = [p](double, const std::array<double, 3>& y, std::array<double, 3>& dy) {
      dy[0] = 10.0 * (y[1] - y[0]);
      dy[1] = p * y[0] - y[1] - y[0] * y[2];
      dy[2] = y[0] * y[1] - 2.666 * y[2];
    };
    const auto ref = testutil::scalar_rk4(f, 0.0, std::array<double, 3>{st.y[0][i], st.y[1][i], st.y[2][i]}, 0.01);
    for (int d = 0; d < 3; ++d) CHECK(testutil::rel_err(r.y_new[d][i], ref[d]) <= 1e-15);
  }
}
