#ifndef SHEAF_GOODWIN_MODELS_GOODWIN_HPP
#define SHEAF_GOODWIN_MODELS_GOODWIN_HPP

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "dynamical_model.hpp"

namespace sheaf_goodwin {

/// State order is (v, u): employment rate, then workers' share.
struct GoodwinParams {
  double alpha = 0.02;  ///< productivity growth
  double beta = 0.01;   ///< labour-force growth
  double gamma = 0.04;  ///< Phillips intercept
  double rho = 0.1;     ///< Phillips slope
  double sigma = 3.0;   ///< capital-output ratio

  /// 1/sigma - (alpha + beta), the growth rate of v when u = 0.
  double natural_growth() const { return 1.0 / sigma - (alpha + beta); }
  double v_star() const { return (alpha + gamma) / rho; }
  double u_star() const { return 1.0 - sigma * (alpha + beta); }

  void validate() const {
    if (!(sigma > 0)) throw DomainError("sigma must be positive");
    if (!(rho > 0)) throw DomainError("rho must be positive");
    if (!(natural_growth() > 0)) throw DomainError("1/sigma - (alpha + beta) must be positive");
  }
};

inline std::array<double, 2> goodwin_rhs(std::array<double, 2> s, const GoodwinParams& p) {
  const auto [v, u] = s;
  return {v * (p.natural_growth() - u / p.sigma), u * (-(p.alpha + p.gamma) + p.rho * v)};
}

inline Matrix goodwin_jacobian(std::array<double, 2> s, const GoodwinParams& p) {
  const auto [v, u] = s;
  Matrix J(2, 2);
  J << p.natural_growth() - u / p.sigma, -v / p.sigma,
       p.rho * u, -(p.alpha + p.gamma) + p.rho * v;
  return J;
}

inline DynamicalModel make_goodwin_model(const GoodwinParams& p) {
  p.validate();
  DynamicalModel m;
  m.name = "goodwin";
  m.state_names = {"v", "u"};
  const double c = p.natural_growth(), k = p.alpha + p.gamma;
  m.rhs = [p, c, k](std::span<const double> s, std::span<double> ds) {
    ds[0] = s[0] * (c - s[1] / p.sigma);
    ds[1] = s[1] * (-k + p.rho * s[0]);
  };
  m.jacobian = [p](const State& s) { return goodwin_jacobian({s[0], s[1]}, p); };
  m.params_hash = detail::hash_params({p.alpha, p.beta, p.gamma, p.rho, p.sigma});
  return m;
}

/// Nontrivial fixed point (v*, u*) = ((alpha+gamma)/rho, 1 - sigma(alpha+beta)).
inline FixedPoint goodwin_equilibrium(const GoodwinParams& p) {
  std::string note;
  const double v = p.v_star(), u = p.u_star();
  if (!(u > 0 && u < 1)) note = "warning: u* outside (0,1)";
  else if (!(v > 0 && v < 1)) note = "warning: v* outside (0,1)";
  return make_fixed_point(make_goodwin_model(p), {v, u}, false, note);
}

/// Trivial point first (flagged, no economic meaning), then (v*, u*).
inline std::vector<FixedPoint> goodwin_equilibria(const GoodwinParams& p) {
  return {make_fixed_point(make_goodwin_model(p), {0.0, 0.0}, true, "trivial; ignored, no economic meaning"),
          goodwin_equilibrium(p)};
}

/// Small-amplitude period 2 pi / sqrt((alpha+gamma)(1/sigma - (alpha+beta))).
inline double goodwin_period(const GoodwinParams& p) {
  return 2.0 * std::numbers::pi / std::sqrt((p.alpha + p.gamma) * p.natural_growth());
}

/// rho v - (alpha+gamma) ln v + u/sigma - c ln u, with c the natural growth.
/// The Goodwin analogue of the Lotka-Volterra log-form integral.
inline double goodwin_first_integral(std::array<double, 2> s, const GoodwinParams& p) {
  const auto [v, u] = s;
  if (!(v > 0 && u > 0)) throw DomainError("first integral needs v > 0 and u > 0");
  return p.rho * v - (p.alpha + p.gamma) * std::log(v) + u / p.sigma - p.natural_growth() * std::log(u);
}

// ---------------------------------------------------------------------------
// Modified Phillips curve: u' = u(-(alpha+gamma) + rho v + g(u))

/// Shift g of the Phillips curve, checked once on construction.
///
/// g must be positive and decreasing on (0,1), tested at 100 evenly spaced
/// points. g identically zero is accepted and reproduces the plain model.
class PhillipsShift {
public:
  using Fn = std::function<double(double)>;

  explicit PhillipsShift(Fn g, std::string description = {}) : g_(std::move(g)), description_(std::move(description)) {
    bool all_zero = true;
    constexpr int n = 100;
    for (int i = 0; i < n; ++i) {
      const double u = (i + 0.5) / n;
      if (g_(u) != 0.0) all_zero = false;
    }
    zero_ = all_zero;
    if (zero_) return;
    for (int i = 0; i < n; ++i) {
      const double u = (i + 0.5) / n;
      const double gu = g_(u);
      if (!(gu > 0)) throw ContractError("g(u) must be positive on (0,1); g(" + std::to_string(u) + ") <= 0");
      if (!(derivative(u) < 0)) throw ContractError("g must be decreasing on (0,1); g'(" + std::to_string(u) + ") >= 0");
    }
  }

  /// g(u) = k (1 - u).
  static PhillipsShift linear(double k) {
    return PhillipsShift([k](double u) { return k * (1.0 - u); }, std::to_string(k) + "*(1-u)");
  }
  static PhillipsShift zero() { return PhillipsShift([](double) { return 0.0; }, "0"); }

  double operator()(double u) const { return g_(u); }
  double derivative(double u) const {
    const double h = 1e-6;
    return (g_(u + h) - g_(u - h)) / (2 * h);
  }
  bool is_zero() const noexcept { return zero_; }
  const std::string& description() const noexcept { return description_; }

private:
  Fn g_;
  std::string description_;
  bool zero_ = false;
};

inline std::array<double, 2> modified_goodwin_rhs(std::array<double, 2> s, const GoodwinParams& p,
                                                  const PhillipsShift& g) {
  const auto [v, u] = s;
  return {v * (p.natural_growth() - u / p.sigma), u * (-(p.alpha + p.gamma) + p.rho * v + g(u))};
}

inline DynamicalModel make_modified_goodwin_model(const GoodwinParams& p, const PhillipsShift& g) {
  p.validate();
  DynamicalModel m;
  m.name = "modified-goodwin";
  m.state_names = {"v", "u"};
  m.rhs = [p, g](std::span<const double> s, std::span<double> ds) {
    const auto r = modified_goodwin_rhs({s[0], s[1]}, p, g);
    ds[0] = r[0];
    ds[1] = r[1];
  };
  m.params_hash = detail::hash_params({p.alpha, p.beta, p.gamma, p.rho, p.sigma, g(0.25), g(0.5), g(0.75)});
  return m;
}

/// (v*, u*) with u* = 1 - sigma(alpha+beta) and v* = (alpha+gamma-g(u*))/rho.
inline FixedPoint modified_goodwin_equilibrium(const GoodwinParams& p, const PhillipsShift& g) {
  const double u = p.u_star();
  const double v = (p.alpha + p.gamma - g(u)) / p.rho;
  return make_fixed_point(make_modified_goodwin_model(p, g), {v, u});
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_MODELS_GOODWIN_HPP
