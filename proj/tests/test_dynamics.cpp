#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "sheaf_goodwin/dynamics/area.hpp"
#include "sheaf_goodwin/dynamics/classify.hpp"
#include "sheaf_goodwin/dynamics/sweep.hpp"
#include "sheaf_goodwin/models/lotka_volterra.hpp"
#include "sheaf_goodwin/models/trade.hpp"
#include "support.hpp"

using namespace sheaf_goodwin;

namespace {

double endpoint_error(const State& a, const State& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

// Mean time between upward crossings of component `i` through `level`.
double crossing_period(const Trajectory& tr, std::size_t i, double level) {
  std::vector<double> times;
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const double a = tr.states[k][i] - level, b = tr.states[k + 1][i] - level;
    if (a < 0 && b >= 0) times.push_back(tr.t[k] + (tr.t[k + 1] - tr.t[k]) * (-a / (b - a)));
  }
  if (times.size() < 2) return NAN;
  return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

DynamicalModel blow_up_model() {
  DynamicalModel m;
  m.name = "blow-up";
  m.state_names = {"x"};
  m.rhs = [](std::span<const double> s, std::span<double> ds) { ds[0] = s[0] * s[0]; };
  return m;
}

} // namespace

TEST(Integrate, FixedPointStaysPut) {
  const auto tr = integrate(make_lv_model({}), {1.0, 1.0}, 5.0, 1e-2);
  for (const auto& x : tr.states) ASSERT_EQ(x, (State{1.0, 1.0}));
  EXPECT_EQ(tr.size(), 501u);
  EXPECT_EQ(tr.t.back(), 5.0);
}

TEST(Integrate, StrideAndRecordFrom) {
  const auto tr = integrate(make_lv_model({}), {2.0, 1.0}, 1.0, 1e-2, {7, 0.5});
  EXPECT_EQ(tr.t.front(), 0.0);
  EXPECT_GE(tr.t[1], 0.5);
  EXPECT_EQ(tr.t.back(), 1.0);  // final step kept even off-stride
  EXPECT_THROW(integrate(make_lv_model({}), {2.0, 1.0}, 1.0, 0.0), DomainError);
  EXPECT_THROW(integrate(make_lv_model({}), {2.0}, 1.0, 1e-2), DomainError);
}

TEST(Integrate, Rk4IsFourthOrder) {
  const auto m = make_lv_model({});
  const State x0{2.0, 1.0};
  for (double h : {0.1, 0.05, 0.02}) {
    const State ref = integrate_to(m, x0, 10.0, h / 8);
    const double e1 = endpoint_error(integrate_to(m, x0, 10.0, h), ref);
    const double e2 = endpoint_error(integrate_to(m, x0, 10.0, h / 2), ref);
    const double ratio = e1 / e2;
    EXPECT_GE(ratio, 12.0) << h;
    EXPECT_LE(ratio, 20.0) << h;
  }
}

TEST(Integrate, LotkaVolterraFirstIntegralDrift) {
  const LVParams p;
  const auto m = make_lv_model(p);
  auto F = [&](const State& x) { return lv_first_integral({x[0], x[1]}, p); };
  const auto rep = conservation_report(integrate(m, {2.0, 1.0}, 100.0, 1e-3), F);
  EXPECT_LT(rep.relative_drift, 1e-6);

  // Slope of log drift against log dt, away from the rounding floor.
  std::vector<double> lx, ly;
  for (double dt : {0.08, 0.04, 0.02, 0.01}) {
    lx.push_back(std::log(dt));
    ly.push_back(std::log(conservation_report(integrate(m, {2.0, 1.0}, 100.0, dt), F).max_drift));
  }
  const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4, my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  EXPECT_GE(sxy / sxx, 3.5);
  EXPECT_LE(sxy / sxx, 4.5);

  Trajectory constant;
  constant.states = {{1, 2}, {3, 4}};
  EXPECT_EQ(conservation_report(constant, [](const State&) { return 1.0; }).max_drift, 0.0);
}

TEST(Integrate, TimeReversalReturnsHome) {
  const auto m = make_lv_model({});
  const State x0{2.0, 1.0};
  const State fwd = integrate_to(m, x0, 10.0, 1e-3);
  const State back = integrate_to(m, fwd, -10.0, 1e-3);
  EXPECT_LT(endpoint_error(back, x0), 1e-6);
}

TEST(Integrate, BlowUpAndRejections) {
  try {
    integrate(blow_up_model(), {1.0}, 2.0, 1e-3);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GT(e.last_valid_index(), 900u);
    EXPECT_LE(e.last_valid_index(), 1001u);  // x = 1/(1-t) leaves the bound just past t = 1
  }
  // Pushing p1 below zero in the excess-demand mode rejects the step.
  TradeModelParams p;
  p.price_mode = PriceMode::excess_demand_ode;
  EXPECT_THROW(integrate(make_two_country_model(p), {0.6, 0.9, -1.0, 0.6, 0.9, 1.0}, 1.0, 1e-3), IntegrationError);
}

TEST(Integrate, AlgebraicPricesKeepTheirProduct) {
  TradeModelParams p;
  p.p0 = {1.5, 0.8};
  const auto tr = integrate(make_two_country_model(p), {0.7, 0.9, 1.0, 0.6, 0.85, 1.0}, 50.0, 1e-3, {100});
  for (const auto& x : tr.states) ASSERT_NEAR(x[kP1] * x[kP2], 1.2, 1e-12);
  p.price_mode = PriceMode::excess_demand_ode;
  const auto tr2 = integrate(make_two_country_model(p), {0.7, 0.9, 1.0, 0.6, 0.85, 1.0}, 20.0, 1e-3, {100});
  for (const auto& x : tr2.states) ASSERT_NEAR(x[kP1] + x[kP2], 2.0, 1e-12);
}

TEST(Period, SmallGoodwinOrbitsMatchTheFormula) {
  Rng rng(21);
  for (int k = 0; k < 10; ++k) {
    const GoodwinParams g = testsupport::random_goodwin_params(rng);
    const double T = goodwin_period(g);
    const auto tr = integrate(make_goodwin_model(g), {g.v_star() + 1e-4, g.u_star()}, 4 * T, T / 4000);
    const double measured = crossing_period(tr, 0, g.v_star());
    EXPECT_NEAR(measured / T, 1.0, 0.01) << "params " << k;
  }
  const GoodwinParams g;
  const auto tr = integrate(make_goodwin_model(g), {g.v_star() + 1e-4, g.u_star()}, 200, 1e-3);
  EXPECT_NEAR(crossing_period(tr, 0, g.v_star()) / goodwin_period(g), 1.0, 0.01);
}

TEST(Area, GoodwinPreservesAndModifiedShrinks) {
  const GoodwinParams g;
  const double T = goodwin_period(g);
  const State c{g.v_star() + 0.02, g.u_star()};
  const std::array<State, 3> tri{c, State{c[0] + 1e-4, c[1]}, State{c[0], c[1] + 1e-4}};
  const auto a = triangle_area_history(make_goodwin_model(g), tri, T, 1e-3, 1);
  EXPECT_LT(std::abs(a[1] / a[0] - 1), 0.01);

  const auto shift = PhillipsShift::linear(0.05);
  const auto b = triangle_area_history(make_modified_goodwin_model(g, shift), tri, 5 * T, 1e-3, 50);
  for (std::size_t i = 1; i < b.size(); ++i) ASSERT_LT(b[i], b[i - 1]) << i;
  EXPECT_LT(b.back() / b.front(), 0.5);
}

TEST(Area, ModifiedIntegralDriftsMonotonically) {
  // Log-form integral centred on the shifted point (v_m, u*); along the
  // modified flow dH/dt = (u - u*)(g(u) - g(u*)) / sigma <= 0.
  const GoodwinParams g;
  const auto shift = PhillipsShift::linear(0.05);
  const double vm = (g.alpha + g.gamma - shift(g.u_star())) / g.rho, us = g.u_star();
  auto H = [&](const State& x) { return g.rho * (x[0] - vm * std::log(x[0])) + (x[1] - us * std::log(x[1])) / g.sigma; };
  const double T = goodwin_period(g);
  const auto tr = integrate(make_modified_goodwin_model(g, shift), {0.7, 0.91}, T, 1e-3, {100});
  for (std::size_t i = 1; i < tr.size(); ++i) ASSERT_LE(H(tr.states[i]), H(tr.states[i - 1]) + 1e-15) << i;
  EXPECT_GT(conservation_report(tr, H).max_drift, 1e-3);
  auto F = [&](const State& x) { return goodwin_first_integral({x[0], x[1]}, g); };
  EXPECT_LT(conservation_report(integrate(make_goodwin_model(g), {0.7, 0.91}, T, 1e-3), F).relative_drift, 1e-9);
}

TEST(Lyapunov, ConservativeNearZeroAndDissipativeNegative) {
  const GoodwinParams g;
  LyapunovOptions o;
  o.horizon = 2000;
  o.dt = 1e-2;
  const double lg = lyapunov_exponent(make_goodwin_model(g), {0.7, 0.91}, o);
  EXPECT_LT(std::abs(lg), kZeroBand);
  const double lm = lyapunov_exponent(make_modified_goodwin_model(g, PhillipsShift::linear(0.05)), {0.7, 0.91}, o);
  EXPECT_LT(lm, 0.0);
  // Same seed, same answer; different seed stays near zero too.
  EXPECT_EQ(lyapunov_exponent(make_goodwin_model(g), {0.7, 0.91}, o), lg);
  o.seed = 99;
  EXPECT_LT(std::abs(lyapunov_exponent(make_goodwin_model(g), {0.7, 0.91}, o)), kZeroBand);
  o.horizon = 0.5;
  EXPECT_THROW(lyapunov_exponent(make_goodwin_model(g), {0.7, 0.91}, o), DomainError);
}

TEST(Lyapunov, SeparatingFlowIsPositive) {
  // x' = x, y' = -y: the exponent is exactly 1 once the direction aligns.
  DynamicalModel m;
  m.name = "saddle";
  m.state_names = {"x", "y"};
  m.rhs = [](std::span<const double> s, std::span<double> ds) {
    ds[0] = s[0];
    ds[1] = -s[1];
  };
  LyapunovOptions o;
  o.horizon = 50;
  o.dt = 1e-3;
  o.renorm_interval = 0.5;
  EXPECT_NEAR(lyapunov_exponent(m, {0, 0}, o), 1.0, 0.05);
}

TEST(Cycles, GoodwinOrbitIsANeutralClosedCycle) {
  const GoodwinParams g;
  ClassifyOptions o;
  o.lyapunov.horizon = 1000;
  o.lyapunov.dt = 1e-2;
  o.record_stride = 1;
  const auto v = classify_dynamics(make_goodwin_model(g), {0.7, 0.91}, o);
  EXPECT_EQ(v.kind, DynamicsKind::limit_cycle) << v.evidence.note;
  ASSERT_TRUE(v.period.has_value());
  EXPECT_TRUE(v.evidence.neutral);
  // The orbit from (0.7, 0.91) is close to the linear period.
  EXPECT_NEAR(*v.period / goodwin_period(g), 1.0, 0.05);
  const auto w = classify_dynamics(make_goodwin_model(g), {0.7, 0.91}, o);
  EXPECT_EQ(w.lyapunov, v.lyapunov);
  EXPECT_EQ(w.period, v.period);
}

TEST(Cycles, ModifiedGoodwinSettlesToAFixedPoint) {
  const GoodwinParams g;
  ClassifyOptions o;
  o.lyapunov.horizon = 3000;
  o.lyapunov.dt = 1e-2;
  const auto v = classify_dynamics(make_modified_goodwin_model(g, PhillipsShift::linear(0.05)), {0.7, 0.91}, o);
  EXPECT_EQ(v.kind, DynamicsKind::fixed_point) << v.evidence.note << " amplitude " << v.evidence.amplitude;
  EXPECT_LT(v.lyapunov, 0.0);
  EXPECT_FALSE(v.period.has_value());
}

TEST(Cycles, ShortRecordsAreUndetermined) {
  const auto tr = integrate(make_goodwin_model({}), {0.7, 0.91}, 30, 1e-2);
  const auto r = detect_limit_cycle(tr);
  EXPECT_FALSE(r.determined);
  EXPECT_FALSE(r.is_cycle);
  EXPECT_FALSE(r.reason.empty());
}

TEST(Sweep, GridShape) {
  const auto g = make_grid(2.0, 4.8, 0.1);
  ASSERT_EQ(g.size(), 29u);
  EXPECT_EQ(g.front(), 2.0);
  EXPECT_NEAR(g.back(), 4.8, 1e-12);
  EXPECT_EQ(make_grid(1, 1, 0.5).size(), 1u);
  EXPECT_THROW(make_grid(1, 0, 0.1), DomainError);
  EXPECT_THROW(make_grid(0, 1, 0), DomainError);
}

TEST(Sweep, RowsIndependentOfJobsAndTruncationReported) {
  const auto grid = make_grid(2.0, 3.5, 0.5);
  SweepCase mk = [](double sigma) {
    if (sigma > 3.4) throw DomainError("sigma too large for this test");
    GoodwinParams g;
    g.sigma = sigma;
    return std::pair{make_goodwin_model(g), State{g.v_star() * 1.05, g.u_star()}};
  };
  ClassifyOptions o;
  o.lyapunov.horizon = 400;
  o.lyapunov.dt = 1e-2;
  const auto a = run_sweep(grid, mk, o, 1);
  const auto b = run_sweep(grid, mk, o, 3);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].value, b[i].value);
    EXPECT_EQ(a[i].truncated, b[i].truncated);
    EXPECT_EQ(a[i].verdict.kind, b[i].verdict.kind);
    EXPECT_EQ(a[i].verdict.lyapunov, b[i].verdict.lyapunov);
    EXPECT_EQ(a[i].verdict.period, b[i].verdict.period);
  }
  EXPECT_FALSE(a[0].truncated);
  EXPECT_TRUE(a[3].truncated);
  EXPECT_NE(a[3].message.find("too large"), std::string::npos);

  SweepCase explode = [](double) { return std::pair{blow_up_model(), State{1.0}}; };
  const auto c = run_sweep({1.0}, explode, o, 2);
  EXPECT_TRUE(c[0].truncated);
}
