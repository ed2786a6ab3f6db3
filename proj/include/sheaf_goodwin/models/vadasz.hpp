#ifndef SHEAF_GOODWIN_MODELS_VADASZ_HPP
#define SHEAF_GOODWIN_MODELS_VADASZ_HPP

#include <array>
#include <cmath>
#include <vector>

#include "../numerics.hpp"
#include "goodwin.hpp"

namespace sheaf_goodwin {

/// Logistic employment growth plus an exponential lag z on the Phillips
/// curve. State order (v, u, z).
struct VadaszParams {
  GoodwinParams base;
  double K = 1.0;         ///< carrying capacity
  double lag_rate = 0.5;  ///< decay a of the weight a e^{-a s}

  void validate() const {
    base.validate();
    if (!(K > 0 && K <= 1)) throw DomainError("K must lie in (0,1]");
    if (!(lag_rate > 0)) throw DomainError("lag_rate must be positive");
  }
};

inline std::array<double, 3> vadasz_rhs(std::array<double, 3> s, const VadaszParams& p) {
  const auto [v, u, z] = s;
  const auto& g = p.base;
  return {v * (g.natural_growth() * (1.0 - v) / p.K - u / g.sigma), u * (-(g.alpha + g.gamma) + g.rho * z),
          p.lag_rate * (v - z)};
}

inline DynamicalModel make_vadasz_model(const VadaszParams& p) {
  p.validate();
  DynamicalModel m;
  m.name = "vadasz";
  m.state_names = {"v", "u", "z"};
  m.rhs = [p](std::span<const double> s, std::span<double> ds) {
    const auto r = vadasz_rhs({s[0], s[1], s[2]}, p);
    ds[0] = r[0];
    ds[1] = r[1];
    ds[2] = r[2];
  };
  const auto& g = p.base;
  m.params_hash = detail::hash_params({g.alpha, g.beta, g.gamma, g.rho, g.sigma, p.K, p.lag_rate});
  return m;
}

/// Closed-form candidate u* = (rho-(alpha+gamma)) sigma (1-sigma(alpha+beta)); checked, not trusted.
inline double vadasz_formula_u_star(const VadaszParams& p) {
  const auto& g = p.base;
  return (g.rho - (g.alpha + g.gamma)) * g.sigma * (1.0 - g.sigma * (g.alpha + g.beta));
}

struct VadaszEquilibria {
  std::vector<FixedPoint> points;  ///< (0,0,0), (1,0,1), nontrivial
  double formula_u_star = 0.0;
  double formula_u_star_residual = 0.0;  ///< |v'| at the formula u*
};

/// The nontrivial u* comes from bisection on v' = 0 at v = z = (alpha+gamma)/rho.
inline VadaszEquilibria vadasz_equilibria(const VadaszParams& p) {
  const DynamicalModel m = make_vadasz_model(p);
  const double v = p.base.v_star();
  auto vdot = [&](double u) { return vadasz_rhs({v, u, v}, p)[0]; };
  const auto root = bisect(vdot, 0.0, 1e3);
  if (!root) throw DomainError("no nontrivial Vadasz fixed point with u > 0");
  VadaszEquilibria out;
  out.points.push_back(make_fixed_point(m, {0.0, 0.0, 0.0}, true, "trivial"));
  out.points.push_back(make_fixed_point(m, {1.0, 0.0, 1.0}, true, "trivial, no wages"));
  out.points.push_back(make_fixed_point(m, {v, *root, v}));
  out.formula_u_star = vadasz_formula_u_star(p);
  out.formula_u_star_residual = std::abs(vdot(out.formula_u_star));
  return out;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_MODELS_VADASZ_HPP
