#ifndef SHEAF_GOODWIN_IO_MODEL_FILE_HPP
#define SHEAF_GOODWIN_IO_MODEL_FILE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "../dynamics/classify.hpp"
#include "../models/lotka_volterra.hpp"
#include "../models/systems.hpp"
#include "../models/vadasz.hpp"
#include "config.hpp"

namespace sheaf_goodwin {

enum class ModelKind { lotka_volterra, goodwin, modified_goodwin, vadasz, two_country };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::lotka_volterra: return "lotka-volterra";
    case ModelKind::goodwin: return "goodwin";
    case ModelKind::modified_goodwin: return "modified-goodwin";
    case ModelKind::vadasz: return "vadasz";
    case ModelKind::two_country: return "two-country";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  for (auto k : {ModelKind::lotka_volterra, ModelKind::goodwin, ModelKind::modified_goodwin, ModelKind::vadasz,
                 ModelKind::two_country})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown model kind '" + s + "'");
}

/// Everything a model file describes, already validated.
///
/// Layout:
///   [model]   kind = goodwin | lotka-volterra | modified-goodwin | vadasz | two-country
///   [params]  model parameters; two-country keys are `country1.alpha` etc.
///   [trade]   theta1, theta2, p0 = p1, p2, price_mode (two-country only)
///   [initial] one key per state component
///   [run]     seed (optional)
struct ModelSpec {
  ModelKind kind = ModelKind::goodwin;
  LVParams lv;
  GoodwinParams goodwin;
  double phillips_k = 0.0;  ///< modified model: g(u) = k (1 - u)
  VadaszParams vadasz;
  TradeModelParams trade;
  State initial;
  std::uint64_t seed = 0;

  DynamicalModel model() const {
    switch (kind) {
      case ModelKind::lotka_volterra: return make_lv_model(lv);
      case ModelKind::goodwin: return make_goodwin_model(goodwin);
      case ModelKind::modified_goodwin: return make_modified_goodwin_model(goodwin, shift());
      case ModelKind::vadasz: return make_vadasz_model(vadasz);
      case ModelKind::two_country: return make_two_country_model(trade);
    }
    throw UnsupportedError("unknown model kind");
  }

  PhillipsShift shift() const { return phillips_k == 0.0 ? PhillipsShift::zero() : PhillipsShift::linear(phillips_k); }

  std::vector<FixedPoint> equilibria() const {
    switch (kind) {
      case ModelKind::lotka_volterra: return lv_equilibria(lv);
      case ModelKind::goodwin: return goodwin_equilibria(goodwin);
      case ModelKind::modified_goodwin: {
        const DynamicalModel m = model();
        return {make_fixed_point(m, {0.0, 0.0}, true, "trivial; ignored, no economic meaning"),
                modified_goodwin_equilibrium(goodwin, shift())};
      }
      case ModelKind::vadasz: return vadasz_equilibria(vadasz).points;
      case ModelKind::two_country: return {two_country_equilibrium(trade)};
    }
    return {};
  }

  /// The pointwise equation system, where the model has one.
  EquationSystem system(PriceEquationForm form = PriceEquationForm::as_printed) const {
    switch (kind) {
      case ModelKind::lotka_volterra: return lotka_volterra_system(lv);
      case ModelKind::goodwin: return goodwin_system(goodwin);
      case ModelKind::two_country: return two_country_system(trade, form);
      default: throw UnsupportedError(std::string("no equation system for model kind '") + to_string(kind) + "'");
    }
  }
};

namespace detail {

inline GoodwinParams read_goodwin(const Config& c, const std::string& prefix) {
  GoodwinParams g;
  g.alpha = c.number("params", prefix + "alpha");
  g.beta = c.number("params", prefix + "beta");
  g.gamma = c.number("params", prefix + "gamma");
  g.rho = c.number("params", prefix + "rho");
  g.sigma = c.number("params", prefix + "sigma");
  return g;
}

} // namespace detail

inline ModelSpec read_model_spec(const Config& c) {
  ModelSpec s;
  s.kind = parse_model_kind(c.get("model", "kind"));
  std::vector<std::string> names;
  switch (s.kind) {
    case ModelKind::lotka_volterra:
      s.lv = {c.number("params", "a"), c.number("params", "b"), c.number("params", "c"), c.number("params", "d")};
      s.lv.validate();
      names = {"x", "y"};
      break;
    case ModelKind::goodwin:
      s.goodwin = detail::read_goodwin(c, "");
      names = {"v", "u"};
      break;
    case ModelKind::modified_goodwin:
      s.goodwin = detail::read_goodwin(c, "");
      s.phillips_k = c.number("params", "phillips_k");
      names = {"v", "u"};
      break;
    case ModelKind::vadasz:
      s.vadasz.base = detail::read_goodwin(c, "");
      s.vadasz.K = c.number("params", "K");
      s.vadasz.lag_rate = c.number("params", "lag_rate");
      names = {"v", "u", "z"};
      break;
    case ModelKind::two_country: {
      for (int i = 1; i <= 2; ++i) {
        CountryParams& cp = i == 1 ? s.trade.country1 : s.trade.country2;
        const std::string pre = "country" + std::to_string(i) + ".";
        cp.goodwin = detail::read_goodwin(c, pre);
        cp.a_prod = c.number("params", pre + "a");
        cp.N = c.number("params", pre + "N");
        cp.theta = c.number("trade", "theta" + std::to_string(i));
      }
      const auto p0 = c.numbers("trade", "p0");
      if (p0.size() != 2) throw ConfigError("'trade.p0' needs two prices");
      s.trade.p0 = {p0[0], p0[1]};
      s.trade.price_mode = parse_price_mode(c.get("trade", "price_mode"));
      names = {"v1", "u1", "p1", "v2", "u2", "p2"};
      break;
    }
  }
  // Constructing the model runs every parameter check.
  const DynamicalModel m = s.model();
  for (const auto& n : names) {
    if (s.kind == ModelKind::two_country && (n == "p1" || n == "p2") && !c.has("initial", n)) {
      s.initial.push_back(s.trade.p0[n == "p1" ? 0 : 1]);
      continue;
    }
    s.initial.push_back(c.number("initial", n));
  }
  const double seed = c.number_or("run", "seed", 0.0);
  if (!(seed >= 0) || seed != static_cast<double>(static_cast<std::uint64_t>(seed)))
    throw ConfigError("'run.seed' must be a non-negative integer");
  s.seed = static_cast<std::uint64_t>(seed);
  return s;
}

/// [classify] keys: horizon, dt, renorm_interval, d0, transient_fraction,
/// tol_cycle, record_stride. Missing keys keep the library defaults.
inline ClassifyOptions read_classify_options(const Config& c, std::uint64_t seed) {
  ClassifyOptions o;
  o.lyapunov.horizon = c.number_or("classify", "horizon", o.lyapunov.horizon);
  o.lyapunov.dt = c.number_or("classify", "dt", o.lyapunov.dt);
  o.lyapunov.renorm_interval = c.number_or("classify", "renorm_interval", o.lyapunov.renorm_interval);
  o.lyapunov.d0 = c.number_or("classify", "d0", o.lyapunov.d0);
  o.lyapunov.seed = seed;
  o.cycle.transient_fraction = c.number_or("classify", "transient_fraction", o.cycle.transient_fraction);
  o.cycle.tol_cycle = c.number_or("classify", "tol_cycle", o.cycle.tol_cycle);
  const double stride = c.number_or("classify", "record_stride", static_cast<double>(o.record_stride));
  if (!(stride >= 1)) throw ConfigError("'classify.record_stride' must be >= 1");
  o.record_stride = static_cast<std::size_t>(stride);
  return o;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_IO_MODEL_FILE_HPP
