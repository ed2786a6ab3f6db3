#ifndef SHEAF_GOODWIN_IO_OUTPUT_HPP
#define SHEAF_GOODWIN_IO_OUTPUT_HPP

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "../dynamics/integrate.hpp"
#include "../dynamics/sweep.hpp"
#include "format.hpp"

namespace sheaf_goodwin {

using Json = nlohmann::ordered_json;

/// RFC 4180 quoting, applied only when needed.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Header `t,<state names>`, then one row per stored step, LF line endings.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const std::vector<std::string>& names) {
  os << "t";
  for (const auto& n : names) os << "," << csv_field(n);
  os << "\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    os << format_double(tr.t[i]);
    for (double x : tr.states[i]) os << "," << format_double(x);
    os << "\n";
  }
}

inline Json complex_json(std::complex<double> z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

inline Json to_json(const FixedPoint& fp, const std::vector<std::string>& names) {
  Json j;
  j["state"] = Json::object();
  for (std::size_t i = 0; i < fp.state.size(); ++i) j["state"][names.at(i)] = fp.state[i];
  j["classification"] = to_string(fp.classification);
  j["eigenvalues"] = Json::array();
  for (const auto& z : fp.eigenvalues) j["eigenvalues"].push_back(complex_json(z));
  j["residual"] = fp.residual;
  j["trivial"] = fp.trivial;
  if (!fp.note.empty()) j["note"] = fp.note;
  return j;
}

inline Json to_json(const DynamicsVerdict& v) {
  Json j;
  j["kind"] = to_string(v.kind);
  j["lyapunov"] = v.lyapunov;
  j["period"] = v.period ? Json(*v.period) : Json(nullptr);
  Json e;
  e["amplitude"] = v.evidence.amplitude;
  e["crossings"] = v.evidence.crossings;
  e["return_spread"] = v.evidence.return_spread;
  e["period_spread"] = v.evidence.period_spread;
  e["mean_divergence"] = v.evidence.mean_divergence;
  e["neutral"] = v.evidence.neutral;
  if (!v.evidence.note.empty()) e["note"] = v.evidence.note;
  j["evidence"] = std::move(e);
  return j;
}

/// `<parameter>,lambda,kind,period`; truncated rows have kind `truncated`
/// and empty numeric fields.
inline void write_sweep_csv(std::ostream& os, const std::string& parameter, const std::vector<SweepRow>& rows) {
  os << csv_field(parameter) << ",lambda,kind,period\n";
  for (const auto& r : rows) {
    os << format_double(r.value, 12) << ",";
    if (r.truncated) {
      os << ",truncated,\n";
      continue;
    }
    os << format_double(r.verdict.lyapunov) << "," << to_string(r.verdict.kind) << ","
       << (r.verdict.period ? format_double(*r.verdict.period) : std::string()) << "\n";
  }
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_IO_OUTPUT_HPP
