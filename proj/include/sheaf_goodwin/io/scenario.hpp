#ifndef SHEAF_GOODWIN_IO_SCENARIO_HPP
#define SHEAF_GOODWIN_IO_SCENARIO_HPP

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "../sections/extension.hpp"
#include "model_file.hpp"

namespace sheaf_goodwin {

/// Equation ids of a named sub-diagram: `country1`, `price` or `country2`
/// for the two-country model.
inline std::vector<std::string> subsystem_equations(ModelKind kind, const std::string& name) {
  if (kind != ModelKind::two_country) throw UnsupportedError("sub-diagrams exist only for the two-country model");
  if (name == "country1" || name == "country2") {
    const int i = name == "country1" ? 1 : 2;
    return {TradeNames::country_equation(i, "v"), TradeNames::country_equation(i, "u")};
  }
  if (name == "price") return {TradeNames::price_equation(1), TradeNames::price_equation(2)};
  throw ConfigError("unknown sub-diagram '" + name + "' (expected country1, price or country2)");
}

/// The equations `ids` of `sys` with just the variables they use.
inline EquationSystem restrict_system(const EquationSystem& sys, const std::vector<std::string>& ids) {
  EquationSystem out(sys.name() + ".sub", sys.mode());
  std::set<std::string> used;
  for (const auto& id : ids)
    for (const auto& v : sys.equation(id).vars) used.insert(v);
  for (const auto& v : sys.variables())
    if (used.count(v.name)) out.add_variable(v.name, v.domain);
  for (const auto& id : ids) out.add_equation(sys.equation(id));
  for (const auto& l : sys.derivative_links())
    if (used.count(l.state) && used.count(l.derivative)) out.add_derivative_link(l.state, l.derivative);
  return out;
}

inline PriceEquationForm parse_price_form(const std::string& s) {
  if (s == "as-printed") return PriceEquationForm::as_printed;
  if (s == "excess-demand") return PriceEquationForm::excess_demand;
  throw ConfigError("unknown price equation form '" + s + "' (expected as-printed or excess-demand)");
}

inline ExtensionMode parse_extension_mode(const std::string& s) {
  if (s == "structural") return ExtensionMode::structural;
  if (s == "numeric") return ExtensionMode::numeric;
  throw ConfigError("unknown extension mode '" + s + "' (expected structural or numeric)");
}

/// A local-section extension run.
///
///   [scenario] model = <model file, relative to this file>   (else the model
///              sections are read from this file), form, scope = a, b
///   [assert]   mode = structural|numeric, then `variable = value` lines
struct Scenario {
  ModelSpec model;
  PriceEquationForm form = PriceEquationForm::as_printed;
  std::vector<std::string> scope;  ///< sub-diagram names; empty means everything
  ExtensionMode mode = ExtensionMode::structural;
  Assignment asserted;

  EquationSystem system() const {
    EquationSystem sys = model.system(form);
    if (scope.empty()) return sys;
    std::vector<std::string> ids;
    for (const auto& s : scope)
      for (auto& id : subsystem_equations(model.kind, s)) ids.push_back(std::move(id));
    return restrict_system(sys, ids);
  }
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string_view rest = s;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = detail::trim(rest.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

inline Scenario read_scenario(const Config& c) {
  Scenario s;
  if (c.has("scenario", "model")) {
    std::filesystem::path p = c.get("scenario", "model");
    if (p.is_relative()) p = std::filesystem::path(c.source()).parent_path() / p;
    s.model = read_model_spec(Config::load(p.string()));
  } else {
    s.model = read_model_spec(c);
  }
  s.form = parse_price_form(c.get_or("scenario", "form", "as-printed"));
  s.scope = split_list(c.get_or("scenario", "scope", ""));
  if (!c.has_section("assert")) throw MissingKeyError("assert");
  s.mode = parse_extension_mode(c.get("assert", "mode"));
  for (const auto& e : c.entries("assert"))
    if (e.key != "mode") s.asserted.set_scalar(e.key, c.number("assert", e.key));
  return s;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_IO_SCENARIO_HPP
