#ifndef SHEAF_GOODWIN_MODELS_SYSTEMS_HPP
#define SHEAF_GOODWIN_MODELS_SYSTEMS_HPP

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "../equation_system.hpp"
#include "lotka_volterra.hpp"
#include "goodwin.hpp"
#include "trade.hpp"

// Pointwise equation systems for the model catalogue: each time-derivative
// is its own variable and every ODE line is one equation.

namespace sheaf_goodwin {

namespace detail {

using ScalarFn = std::function<double(const std::vector<double>&)>;

inline std::vector<double> scalars(const std::vector<StalkValue>& args) {
  std::vector<double> x;
  x.reserve(args.size());
  for (const auto& a : args) x.push_back(a.at(0));
  return x;
}

inline ResidualFn scalar_residual(ScalarFn f) {
  return [f](const std::vector<StalkValue>& args) { return f(scalars(args)); };
}

inline SolvedForm scalar_form(ScalarFn f) {
  return [f](const std::vector<StalkValue>& args) { return StalkValue{f(scalars(args))}; };
}

inline StalkSpace box(double lo, double hi, const std::string& label) {
  return StalkSpace::real_vector(1, lo, hi, label);
}

/// Equation `target = rhs(inputs)` with extra inverses keyed by variable.
inline Equation explicit_equation(std::string id, std::vector<std::string> vars, std::string target,
                                  std::string formula, ScalarFn residual,
                                  std::map<std::string, ScalarFn> inverses) {
  Equation e;
  e.id = std::move(id);
  e.vars = std::move(vars);
  e.defines = std::move(target);
  e.formula = std::move(formula);
  e.residual = scalar_residual(std::move(residual));
  for (auto& [v, f] : inverses) e.solved_forms[v] = scalar_form(std::move(f));
  return e;
}

/// The two Goodwin lines of one economy. With `with_price` the share equation
/// carries the 1/p factor of the trade model.
inline void add_goodwin_block(EquationSystem& sys, const std::string& prefix, const GoodwinParams& g,
                              bool with_price) {
  const std::string v = prefix + "v", u = prefix + "u", p = prefix + "p";
  const std::string vd = prefix + "v_dot", ud = prefix + "u_dot";
  const double c = g.natural_growth(), k = g.alpha + g.gamma, rho = g.rho, sigma = g.sigma;

  // vars: v, u, v_dot
  sys.add_equation(explicit_equation(
      "eq." + prefix + "v", {v, u, vd}, vd, vd + " = " + v + " (1/sigma - (alpha+beta) - " + u + "/sigma)",
      [=](const std::vector<double>& x) { return x[2] - x[0] * (c - x[1] / sigma); },
      {{vd, [=](const std::vector<double>& x) { return x[0] * (c - x[1] / sigma); }},
       {u, [=](const std::vector<double>& x) { return sigma * (c - x[1] / x[0]); }},
       {v, [=](const std::vector<double>& x) { return x[1] / (c - x[0] / sigma); }}}));

  if (!with_price) {
    // vars: u, v, u_dot
    sys.add_equation(explicit_equation(
        "eq." + prefix + "u", {u, v, ud}, ud, ud + " = " + u + " (-(alpha+gamma) + rho " + v + ")",
        [=](const std::vector<double>& x) { return x[2] - x[0] * (-k + rho * x[1]); },
        {{ud, [=](const std::vector<double>& x) { return x[0] * (-k + rho * x[1]); }},
         {v, [=](const std::vector<double>& x) { return (x[1] / x[0] + k) / rho; }},
         {u, [=](const std::vector<double>& x) { return x[1] / (-k + rho * x[0]); }}}));
    return;
  }
  // vars: u, v, p, u_dot
  sys.add_equation(explicit_equation(
      "eq." + prefix + "u", {u, v, p, ud}, ud, ud + " = (" + u + "/" + p + ") (-(alpha+gamma) + rho " + v + ")",
      [=](const std::vector<double>& x) { return x[3] - x[0] / x[2] * (-k + rho * x[1]); },
      {{ud, [=](const std::vector<double>& x) { return x[0] / x[2] * (-k + rho * x[1]); }},
       {p, [=](const std::vector<double>& x) { return x[0] * (-k + rho * x[1]) / x[2]; }},
       {v, [=](const std::vector<double>& x) { return (x[2] * x[1] / x[0] + k) / rho; }},
       {u, [=](const std::vector<double>& x) { return x[1] * x[2] / (-k + rho * x[0]); }}}));
}

} // namespace detail

/// Variables v, u, v_dot, u_dot; equations eq.v (defines v_dot), eq.u (defines u_dot).
inline EquationSystem goodwin_system(const GoodwinParams& g) {
  g.validate();
  EquationSystem sys("goodwin");
  sys.add_variable("v", detail::box(0.2, 1.0, "W(v)"))
      .add_variable("u", detail::box(0.2, 1.0, "W(u)"))
      .add_variable("v_dot", detail::box(-0.1, 0.1, "W(v_dot)"))
      .add_variable("u_dot", detail::box(-0.1, 0.1, "W(u_dot)"));
  detail::add_goodwin_block(sys, "", g, false);
  sys.add_derivative_link("v", "v_dot").add_derivative_link("u", "u_dot");
  return sys;
}

/// Lotka-Volterra in the same layout: x, y, x_dot, y_dot.
inline EquationSystem lotka_volterra_system(const LVParams& p) {
  p.validate();
  EquationSystem sys("lotka-volterra");
  sys.add_variable("x", detail::box(0.2, 3.0, "W(x)"))
      .add_variable("y", detail::box(0.2, 3.0, "W(y)"))
      .add_variable("x_dot", detail::box(-1.0, 1.0, "W(x_dot)"))
      .add_variable("y_dot", detail::box(-1.0, 1.0, "W(y_dot)"));
  const double a = p.a, b = p.b, c = p.c, d = p.d;
  sys.add_equation(detail::explicit_equation(
      "eq.x", {"x", "y", "x_dot"}, "x_dot", "x_dot = a x - b x y",
      [=](const std::vector<double>& s) { return s[2] - (a * s[0] - b * s[0] * s[1]); },
      {{"x_dot", [=](const std::vector<double>& s) { return a * s[0] - b * s[0] * s[1]; }}}));
  sys.add_equation(detail::explicit_equation(
      "eq.y", {"y", "x", "y_dot"}, "y_dot", "y_dot = -c y + d x y",
      [=](const std::vector<double>& s) { return s[2] - (-c * s[0] + d * s[1] * s[0]); },
      {{"y_dot", [=](const std::vector<double>& s) { return -c * s[0] + d * s[1] * s[0]; }}}));
  sys.add_derivative_link("x", "x_dot").add_derivative_link("y", "y_dot");
  return sys;
}

/// How the price lines of the pointwise trade system read.
enum class PriceEquationForm {
  as_printed,     ///< p_i_dot equals the i-th coordinate of E
  excess_demand,  ///< p_1_dot = (1-theta2) p2 I2 - (1-theta1) p1 I1, p_2_dot its negative
};

inline const char* to_string(PriceEquationForm f) {
  return f == PriceEquationForm::as_printed ? "as-printed" : "excess-demand";
}

/// Identifiers of the two-country pointwise system.
struct TradeNames {
  static std::string var(int country, const std::string& base) {
    return "country" + std::to_string(country) + "." + base;
  }
  static std::string price_equation(int i) { return "eq.price" + std::to_string(i); }
  static std::string country_equation(int country, const std::string& base) {
    return "eq.country" + std::to_string(country) + "." + base;
  }
};

/// Twelve variables (v, u, p and their derivatives per country) and six
/// equations: two Goodwin lines per country and two price lines.
///
/// Both price lines list u1, v1, p1, u2, v2, p2 plus their own price
/// derivative. In the as-printed form the residual ignores p1 and p2 (they
/// only enter through the constant p1(0) p2(0)), and both forms depend on
/// (u2, v2) only through the product u2 v2.
inline EquationSystem two_country_system(const TradeModelParams& params,
                                         PriceEquationForm form = PriceEquationForm::as_printed) {
  params.validate();
  EquationSystem sys(std::string("two-country.") + to_string(form));
  for (int i = 1; i <= 2; ++i) {
    sys.add_variable(TradeNames::var(i, "v"), detail::box(0.2, 1.0, "W(v)"))
        .add_variable(TradeNames::var(i, "u"), detail::box(0.2, 1.0, "W(u)"))
        .add_variable(TradeNames::var(i, "p"), detail::box(0.5, 2.0, "W(p)"))
        .add_variable(TradeNames::var(i, "v_dot"), detail::box(-0.1, 0.1, "W(v_dot)"))
        .add_variable(TradeNames::var(i, "u_dot"), detail::box(-0.1, 0.1, "W(u_dot)"))
        .add_variable(TradeNames::var(i, "p_dot"), detail::box(-0.1, 2.0, "W(p_dot)"));
  }
  const CountryParams* c[3] = {nullptr, &params.country1, &params.country2};
  for (int i = 1; i <= 2; ++i)
    detail::add_goodwin_block(sys, "country" + std::to_string(i) + ".", c[i]->goodwin, true);

  const double P = params.price_product();
  const double a1N1 = params.country1.a_prod * params.country1.N;
  const double a2N2 = params.country2.a_prod * params.country2.N;
  const double w1 = 1.0 - params.country1.theta, w2 = 1.0 - params.country2.theta;
  // Common argument order: u1, v1, p1, u2, v2, p2, p_i_dot.
  const std::vector<std::string> shared = {TradeNames::var(1, "u"), TradeNames::var(1, "v"), TradeNames::var(1, "p"),
                                           TradeNames::var(2, "u"), TradeNames::var(2, "v"), TradeNames::var(2, "p")};
  for (int i = 1; i <= 2; ++i) {
    auto vars = shared;
    const std::string pd = TradeNames::var(i, "p_dot");
    vars.push_back(pd);
    using X = std::vector<double>;
    detail::ScalarFn rhs;
    std::map<std::string, detail::ScalarFn> inv;
    std::string formula;
    if (form == PriceEquationForm::as_printed) {
      // p1_dot = sqrt(P I2 / I1), p2_dot = sqrt(P I1 / I2)
      const bool first = (i == 1);
      rhs = [=](const X& x) {
        const double I1 = a1N1 * x[0] * x[1], I2 = a2N2 * x[3] * x[4];
        return first ? std::sqrt(P * I2 / I1) : std::sqrt(P * I1 / I2);
      };
      formula = first ? "p1_dot = sqrt(p1(0) p2(0) I2 / I1)" : "p2_dot = sqrt(p1(0) p2(0) I1 / I2)";
      // Inputs exclude the target, so indices shift past it.
      if (first) {
        inv[TradeNames::var(1, "u")] = [=](const X& y) {  // y: v1,p1,u2,v2,p2,pd
          const double I1 = P * a2N2 * y[2] * y[3] / (y[5] * y[5]);
          return I1 / (a1N1 * y[0]);
        };
        inv[TradeNames::var(1, "v")] = [=](const X& y) {  // y: u1,p1,u2,v2,p2,pd
          const double I1 = P * a2N2 * y[2] * y[3] / (y[5] * y[5]);
          return I1 / (a1N1 * y[0]);
        };
        inv[TradeNames::var(2, "u")] = [=](const X& y) {  // y: u1,v1,p1,v2,p2,pd
          const double I2 = y[5] * y[5] * a1N1 * y[0] * y[1] / P;
          return I2 / (a2N2 * y[3]);
        };
        inv[TradeNames::var(2, "v")] = [=](const X& y) {  // y: u1,v1,p1,u2,p2,pd
          const double I2 = y[5] * y[5] * a1N1 * y[0] * y[1] / P;
          return I2 / (a2N2 * y[3]);
        };
      } else {
        inv[TradeNames::var(1, "u")] = [=](const X& y) {  // y: v1,p1,u2,v2,p2,pd
          const double I1 = y[5] * y[5] * a2N2 * y[2] * y[3] / P;
          return I1 / (a1N1 * y[0]);
        };
        inv[TradeNames::var(1, "v")] = [=](const X& y) {
          const double I1 = y[5] * y[5] * a2N2 * y[2] * y[3] / P;
          return I1 / (a1N1 * y[0]);
        };
        inv[TradeNames::var(2, "u")] = [=](const X& y) {  // y: u1,v1,p1,v2,p2,pd
          const double I2 = P * a1N1 * y[0] * y[1] / (y[5] * y[5]);
          return I2 / (a2N2 * y[3]);
        };
        inv[TradeNames::var(2, "v")] = [=](const X& y) {
          const double I2 = P * a1N1 * y[0] * y[1] / (y[5] * y[5]);
          return I2 / (a2N2 * y[3]);
        };
      }
    } else {
      const double sgn = (i == 1) ? 1.0 : -1.0;
      rhs = [=](const X& x) {
        const double I1 = a1N1 * x[0] * x[1], I2 = a2N2 * x[3] * x[4];
        return sgn * (w2 * x[5] * I2 - w1 * x[2] * I1);
      };
      formula = (i == 1) ? "p1_dot = (1-theta2) p2 I2 - (1-theta1) p1 I1"
                         : "p2_dot = (1-theta1) p1 I1 - (1-theta2) p2 I2";
      // D = sgn * pd is the excess demand w2 p2 I2 - w1 p1 I1.
      inv[TradeNames::var(1, "p")] = [=](const X& y) {  // y: u1,v1,u2,v2,p2,pd
        return (w2 * y[4] * a2N2 * y[2] * y[3] - sgn * y[5]) / (w1 * a1N1 * y[0] * y[1]);
      };
      inv[TradeNames::var(2, "p")] = [=](const X& y) {  // y: u1,v1,p1,u2,v2,pd
        return (sgn * y[5] + w1 * y[2] * a1N1 * y[0] * y[1]) / (w2 * a2N2 * y[3] * y[4]);
      };
      inv[TradeNames::var(1, "u")] = [=](const X& y) {  // y: v1,p1,u2,v2,p2,pd
        return (w2 * y[4] * a2N2 * y[2] * y[3] - sgn * y[5]) / (w1 * y[1] * a1N1 * y[0]);
      };
      inv[TradeNames::var(1, "v")] = [=](const X& y) {  // y: u1,p1,u2,v2,p2,pd
        return (w2 * y[4] * a2N2 * y[2] * y[3] - sgn * y[5]) / (w1 * y[1] * a1N1 * y[0]);
      };
      inv[TradeNames::var(2, "u")] = [=](const X& y) {  // y: u1,v1,p1,v2,p2,pd
        return (sgn * y[5] + w1 * y[2] * a1N1 * y[0] * y[1]) / (w2 * y[4] * a2N2 * y[3]);
      };
      inv[TradeNames::var(2, "v")] = [=](const X& y) {  // y: u1,v1,p1,u2,p2,pd
        return (sgn * y[5] + w1 * y[2] * a1N1 * y[0] * y[1]) / (w2 * y[4] * a2N2 * y[3]);
      };
    }
    inv[pd] = [rhs](const X& y) { return rhs(y); };
    sys.add_equation(detail::explicit_equation(
        TradeNames::price_equation(i), vars, pd, formula,
        [rhs](const X& x) { return x[6] - rhs(x); }, std::move(inv)));
  }
  for (int i = 1; i <= 2; ++i)
    for (const char* b : {"v", "u", "p"})
      sys.add_derivative_link(TradeNames::var(i, b), TradeNames::var(i, std::string(b) + "_dot"));
  return sys;
}

/// Equilibrium assignment of the pointwise trade system: each country at its
/// Goodwin point, prices at E, the Goodwin derivatives zero, and the price
/// derivatives whatever the price lines then force.
inline Assignment two_country_equilibrium_assignment(const TradeModelParams& params, PriceEquationForm form) {
  const EquationSystem sys = two_country_system(params, form);
  const FixedPoint fp = two_country_equilibrium(params);
  Assignment a;
  const auto& s = fp.state;
  a.set_scalar(TradeNames::var(1, "v"), s[kV1]);
  a.set_scalar(TradeNames::var(1, "u"), s[kU1]);
  a.set_scalar(TradeNames::var(1, "p"), s[kP1]);
  a.set_scalar(TradeNames::var(2, "v"), s[kV2]);
  a.set_scalar(TradeNames::var(2, "u"), s[kU2]);
  a.set_scalar(TradeNames::var(2, "p"), s[kP2]);
  for (int i = 1; i <= 2; ++i) {
    a.set_scalar(TradeNames::var(i, "v_dot"), 0.0);
    a.set_scalar(TradeNames::var(i, "u_dot"), 0.0);
  }
  for (int i = 1; i <= 2; ++i) {
    const Equation& e = sys.equation(TradeNames::price_equation(i));
    std::vector<StalkValue> in;
    for (const auto& v : e.inputs_for(*e.defines)) in.push_back(a.at(v));
    a.set(*e.defines, (*e.solved_for(*e.defines))(in));
  }
  return a;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_MODELS_SYSTEMS_HPP
