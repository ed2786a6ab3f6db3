#ifndef SHEAF_GOODWIN_MODELS_LOTKA_VOLTERRA_HPP
#define SHEAF_GOODWIN_MODELS_LOTKA_VOLTERRA_HPP

#include <array>
#include <cmath>
#include <vector>

#include "dynamical_model.hpp"

namespace sheaf_goodwin {

/// x' = a x - b x y,  y' = -c y + d x y.
struct LVParams {
  double a = 1.0;  ///< prey growth
  double b = 1.0;  ///< predation
  double c = 1.0;  ///< predator decay
  double d = 1.0;  ///< conversion

  void validate() const {
    if (!(a > 0 && b > 0 && c > 0 && d > 0)) throw DomainError("Lotka-Volterra parameters must all be positive");
  }
};

inline std::array<double, 2> lv_rhs(std::array<double, 2> s, const LVParams& p) {
  const auto [x, y] = s;
  return {p.a * x - p.b * x * y, -p.c * y + p.d * x * y};
}

inline Matrix lv_jacobian(std::array<double, 2> s, const LVParams& p) {
  const auto [x, y] = s;
  Matrix J(2, 2);
  J << p.a - p.b * y, -p.b * x,
       p.d * y, -p.c + p.d * x;
  return J;
}

/// Log form  -a ln y + b y - c ln x + d x, constant along orbits.
inline double lv_first_integral(std::array<double, 2> s, const LVParams& p) {
  const auto [x, y] = s;
  if (!(x > 0 && y > 0)) throw DomainError("first integral needs x > 0 and y > 0");
  return -p.a * std::log(y) + p.b * y - p.c * std::log(x) + p.d * x;
}

inline DynamicalModel make_lv_model(const LVParams& p) {
  p.validate();
  DynamicalModel m;
  m.name = "lotka-volterra";
  m.state_names = {"x", "y"};
  m.rhs = [p](std::span<const double> s, std::span<double> ds) {
    ds[0] = p.a * s[0] - p.b * s[0] * s[1];
    ds[1] = -p.c * s[1] + p.d * s[0] * s[1];
  };
  m.jacobian = [p](const State& s) { return lv_jacobian({s[0], s[1]}, p); };
  m.params_hash = detail::hash_params({p.a, p.b, p.c, p.d});
  return m;
}

/// Origin (saddle) and the coexistence point (c/d, a/b).
inline std::vector<FixedPoint> lv_equilibria(const LVParams& p) {
  const DynamicalModel m = make_lv_model(p);
  return {make_fixed_point(m, {0.0, 0.0}, true), make_fixed_point(m, {p.c / p.d, p.a / p.b})};
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_MODELS_LOTKA_VOLTERRA_HPP
