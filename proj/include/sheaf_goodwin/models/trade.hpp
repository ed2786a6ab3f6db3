#ifndef SHEAF_GOODWIN_MODELS_TRADE_HPP
#define SHEAF_GOODWIN_MODELS_TRADE_HPP

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "goodwin.hpp"

namespace sheaf_goodwin {

/// One economy in the two-country horizontal-trade model.
struct CountryParams {
  GoodwinParams goodwin;
  double a_prod = 1.0;  ///< labour productivity a_i
  double N = 1.0;       ///< labour supply N_i
  double theta = 0.5;   ///< home bias

  /// Wage income I = a u v N.
  double income(double u, double v) const { return a_prod * u * v * N; }

  void validate() const {
    goodwin.validate();
    if (!(theta > 0 && theta < 1)) throw DomainError("theta must lie strictly in (0,1)");
    if (!(a_prod > 0 && N > 0)) throw DomainError("a_prod and N must be positive");
  }
};

enum class PriceMode { algebraic_equilibrium, excess_demand_ode };

inline const char* to_string(PriceMode m) {
  return m == PriceMode::algebraic_equilibrium ? "algebraic-equilibrium" : "excess-demand-ode";
}

inline PriceMode parse_price_mode(std::string_view s) {
  if (s == "algebraic-equilibrium") return PriceMode::algebraic_equilibrium;
  if (s == "excess-demand-ode") return PriceMode::excess_demand_ode;
  throw DomainError("unknown price_mode '" + std::string(s) + "'");
}

struct TradeModelParams {
  CountryParams country1;
  CountryParams country2;
  std::array<double, 2> p0{1.0, 1.0};
  PriceMode price_mode = PriceMode::algebraic_equilibrium;

  double price_product() const { return p0[0] * p0[1]; }

  void validate() const {
    country1.validate();
    country2.validate();
    if (!(p0[0] > 0 && p0[1] > 0)) throw DomainError("initial prices must be positive");
  }
};

/// Joint state, in the order used everywhere: (v1, u1, p1, v2, u2, p2).
enum TradeIndex : std::size_t { kV1 = 0, kU1 = 1, kP1 = 2, kV2 = 3, kU2 = 4, kP2 = 5 };
using TradeState = std::array<double, 6>;

struct Bundle {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Demand of country one at prices (p1, p2) out of income I1 = a1 u v N1.
inline Bundle demand_country_one(const CountryParams& c, double p1, double p2, double u, double v) {
  if (!(p1 > 0 && p2 > 0)) throw DomainError("prices must be positive");
  const double I = c.income(u, v);
  return {(c.theta * p1 + p2) * I / (p1 * (p1 + p2)), (1.0 - c.theta) * p1 * I / (p2 * (p1 + p2))};
}

/// Demand of country two, the mirror image of country one's (home good is x2).
inline Bundle demand_country_two(const CountryParams& c, double p1, double p2, double u, double v) {
  if (!(p1 > 0 && p2 > 0)) throw DomainError("prices must be positive");
  const double I = c.income(u, v);
  return {(1.0 - c.theta) * p2 * I / (p1 * (p1 + p2)), (c.theta * p2 + p1) * I / (p2 * (p1 + p2))};
}

/// Demand of `country` (1 or 2) given the other country's price and its own.
inline Bundle demand(int country, const CountryParams& c, double other_price, double own_price, double u, double v) {
  if (country == 1) return demand_country_one(c, own_price, other_price, u, v);
  if (country == 2) return demand_country_two(c, other_price, own_price, u, v);
  throw DomainError("country must be 1 or 2");
}

inline double income1(const TradeState& s, const TradeModelParams& p) { return p.country1.income(s[kU1], s[kV1]); }
inline double income2(const TradeState& s, const TradeModelParams& p) { return p.country2.income(s[kU2], s[kV2]); }

/// Excess-demand price adjustment; the second component is minus the first.
inline std::array<double, 2> price_excess_demand_rhs(std::array<double, 2> prices, const TradeState& s,
                                                     const TradeModelParams& p) {
  const double d = (1.0 - p.country2.theta) * prices[1] * income2(s, p) -
                   (1.0 - p.country1.theta) * prices[0] * income1(s, p);
  return {d, -d};
}

/// Matrix A with p' = A p for the excess-demand adjustment at fixed (u, v).
inline Matrix price_adjustment_matrix(const TradeState& s, const TradeModelParams& p) {
  const double k1 = (1.0 - p.country1.theta) * income1(s, p);
  const double k2 = (1.0 - p.country2.theta) * income2(s, p);
  Matrix A(2, 2);
  A << -k1, k2,
        k1, -k2;
  return A;
}

/// Point E where the price hyperbola p1 p2 = p1(0) p2(0) meets the balanced
/// trade ray p2 / p1 = I1 / I2.
inline std::array<double, 2> short_run_price_equilibrium(const TradeState& s, const TradeModelParams& p) {
  const double I1 = income1(s, p), I2 = income2(s, p);
  if (!(I1 > 0) || !(I2 > 0)) throw DomainError("singular state: a country has zero income");
  const double P = p.price_product();
  return {std::sqrt(P * I2 / I1), std::sqrt(P * I1 / I2)};
}

/// Right-hand side of the coupled system.
///
/// u_i' carries the 1/p_i factor. In algebraic-equilibrium mode the price
/// components are 0 and the integrator resets p to E after each step; in
/// excess-demand-ode mode they follow the adjustment equation.
inline TradeState two_country_rhs(const TradeState& s, const TradeModelParams& p) {
  if (!(s[kP1] > 0 && s[kP2] > 0)) throw DomainError("prices must stay positive");
  const auto& g1 = p.country1.goodwin;
  const auto& g2 = p.country2.goodwin;
  TradeState d{};
  d[kV1] = s[kV1] * (g1.natural_growth() - s[kU1] / g1.sigma);
  d[kU1] = s[kU1] / s[kP1] * (-(g1.alpha + g1.gamma) + g1.rho * s[kV1]);
  d[kV2] = s[kV2] * (g2.natural_growth() - s[kU2] / g2.sigma);
  d[kU2] = s[kU2] / s[kP2] * (-(g2.alpha + g2.gamma) + g2.rho * s[kV2]);
  if (p.price_mode == PriceMode::excess_demand_ode) {
    const auto dp = price_excess_demand_rhs({s[kP1], s[kP2]}, s, p);
    d[kP1] = dp[0];
    d[kP2] = dp[1];
  }
  return d;
}

inline void project_prices(std::span<double> s, const TradeModelParams& p) {
  TradeState t;
  std::copy(s.begin(), s.end(), t.begin());
  const auto e = short_run_price_equilibrium(t, p);
  s[kP1] = e[0];
  s[kP2] = e[1];
}

inline DynamicalModel make_two_country_model(const TradeModelParams& p) {
  p.validate();
  DynamicalModel m;
  m.name = "two-country";
  m.state_names = {"v1", "u1", "p1", "v2", "u2", "p2"};
  m.rhs = [p](std::span<const double> s, std::span<double> ds) {
    TradeState t;
    std::copy(s.begin(), s.end(), t.begin());
    const TradeState d = two_country_rhs(t, p);
    std::copy(d.begin(), d.end(), ds.begin());
  };
  if (p.price_mode == PriceMode::algebraic_equilibrium) {
    m.project = [p](std::span<double> s) { project_prices(s, p); };
    m.projected_components = {kP1, kP2};
  }
  m.positive_components = {kP1, kP2};
  const auto& a = p.country1;
  const auto& b = p.country2;
  m.params_hash = detail::hash_params({a.goodwin.alpha, a.goodwin.beta, a.goodwin.gamma, a.goodwin.rho,
                                       a.goodwin.sigma, a.a_prod, a.N, a.theta, b.goodwin.alpha, b.goodwin.beta,
                                       b.goodwin.gamma, b.goodwin.rho, b.goodwin.sigma, b.a_prod, b.N, b.theta,
                                       p.p0[0], p.p0[1],
                                       static_cast<double>(p.price_mode == PriceMode::excess_demand_ode)});
  return m;
}

/// (v_i*, u_i*) from each country's Goodwin point, prices at E of that state.
///
/// E lies on the zero set of the excess demand only when theta1 == theta2,
/// so in excess-demand-ode mode with unequal home bias the returned point
/// has a nonzero price residual (reported in `residual`).
inline FixedPoint two_country_equilibrium(const TradeModelParams& p) {
  const auto& g1 = p.country1.goodwin;
  const auto& g2 = p.country2.goodwin;
  TradeState s{g1.v_star(), g1.u_star(), 0.0, g2.v_star(), g2.u_star(), 0.0};
  const auto e = short_run_price_equilibrium(s, p);
  s[kP1] = e[0];
  s[kP2] = e[1];
  return make_fixed_point(make_two_country_model(p), State(s.begin(), s.end()));
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_MODELS_TRADE_HPP
