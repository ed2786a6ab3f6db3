#ifndef SHEAF_GOODWIN_SECTIONS_REPORT_HPP
#define SHEAF_GOODWIN_SECTIONS_REPORT_HPP

#include <algorithm>
#include <sstream>
#include <string>

#include "json.hpp"

#include "../io/format.hpp"
#include "extension.hpp"

namespace sheaf_goodwin {

struct ExtensionReport {
  std::string table;
  nlohmann::ordered_json json;
};

namespace detail {

inline nlohmann::ordered_json assignment_json(const Assignment& a) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : a) j[k] = v.size() == 1 ? nlohmann::ordered_json(v[0]) : nlohmann::ordered_json(v);
  return j;
}

inline std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

} // namespace detail

/// The chase order as a fixed-width table plus the same content as JSON.
inline ExtensionReport section_report(const ExtensionResult& r) {
  ExtensionReport out;
  auto& j = out.json;
  j["mode"] = to_string(r.mode);
  j["asserted"] = detail::assignment_json(r.asserted);
  j["dof_consumed"] = r.dof_consumed;
  j["determined"] = nlohmann::ordered_json::array();
  for (const auto& d : r.determined) {
    nlohmann::ordered_json e;
    e["variable"] = d.variable;
    e["via"] = d.via;
    e["round"] = d.round;
    e["value"] = d.value ? nlohmann::ordered_json(*d.value) : nlohmann::ordered_json(nullptr);
    j["determined"].push_back(std::move(e));
  }
  j["still_free"] = r.still_free;
  j["conflicts"] = nlohmann::ordered_json::array();
  for (const auto& c : r.conflicts) j["conflicts"].push_back({{"equation", c.equation}, {"residual", c.residual}});
  j["ambiguities"] = nlohmann::ordered_json::array();
  for (const auto& a : r.ambiguities) {
    nlohmann::ordered_json e;
    e["variables"] = a.variables;
    e["equations"] = a.equations;
    e["reason"] = a.reason;
    e["solutions_found"] = a.solutions_found;
    e["witnesses"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < a.witnesses.size(); ++k) {
      e["witnesses"].push_back(
          {{"values", detail::assignment_json(a.witnesses[k])}, {"max_residual", a.witness_residuals[k]}});
    }
    j["ambiguities"].push_back(std::move(e));
  }

  std::size_t wv = 8, wq = 8;  // "variable", "asserted"
  for (const auto& [k, v] : r.asserted) wv = std::max(wv, k.size());
  for (const auto& d : r.determined) {
    wv = std::max(wv, d.variable.size());
    wq = std::max(wq, d.via.size());
  }
  std::ostringstream t;
  t << "mode: " << to_string(r.mode) << "   asserted: " << r.asserted.size() << "   determined: " << r.determined.size()
    << "   free: " << r.still_free.size() << "\n";
  t << detail::pad("step", 6) << detail::pad("variable", wv + 2) << detail::pad("via", wq + 2) << "value\n";
  for (const auto& [k, v] : r.asserted)
    t << detail::pad("0", 6) << detail::pad(k, wv + 2) << detail::pad("asserted", wq + 2)
      << (v.size() == 1 ? format_double(v[0], 10) : "-") << "\n";
  for (const auto& d : r.determined)
    t << detail::pad(std::to_string(d.round), 6) << detail::pad(d.variable, wv + 2) << detail::pad(d.via, wq + 2)
      << (d.value ? format_double(*d.value, 10) : (r.mode == ExtensionMode::structural ? "determined" : "ambiguous"))
      << "\n";
  if (!r.still_free.empty()) {
    t << "free:";
    for (const auto& v : r.still_free) t << " " << v;
    t << "\n";
  }
  for (const auto& c : r.conflicts) t << "conflict: " << c.equation << " residual " << format_double(c.residual, 6) << "\n";
  for (const auto& a : r.ambiguities) {
    t << "ambiguity:";
    for (const auto& v : a.variables) t << " " << v;
    t << " (" << a.reason << ")\n";
    for (std::size_t k = 0; k < a.witnesses.size(); ++k) {
      t << "  witness " << (k + 1) << ":";
      for (const auto& v : a.variables)
        if (a.witnesses[k].contains(v)) t << " " << v << "=" << format_double(a.witnesses[k].at(v)[0], 10);
      t << "  max residual " << format_double(a.witness_residuals[k], 3) << "\n";
    }
  }
  out.table = t.str();
  return out;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_SECTIONS_REPORT_HPP
