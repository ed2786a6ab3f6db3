#ifndef SHEAF_GOODWIN_SHEAF_HPP
#define SHEAF_GOODWIN_SHEAF_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "poset.hpp"
#include "stalk.hpp"

namespace sheaf_goodwin {

using RestrictionMap = std::function<StalkValue(const StalkValue&)>;

/// Partial map from element ids to stalk values: a candidate local or
/// global section.
class Assignment {
public:
  Assignment() = default;
  Assignment(std::initializer_list<std::pair<const std::string, StalkValue>> init) : values_(init) {}

  void set(const std::string& id, StalkValue v) { values_[id] = std::move(v); }
  void set_scalar(const std::string& id, double v) { values_[id] = StalkValue{v}; }
  void erase(const std::string& id) { values_.erase(id); }
  bool contains(const std::string& id) const { return values_.count(id) != 0; }
  const StalkValue& at(const std::string& id) const {
    auto it = values_.find(id);
    if (it == values_.end()) throw StructuralError("assignment has no value for '" + id + "'");
    return it->second;
  }
  std::optional<StalkValue> get(const std::string& id) const {
    auto it = values_.find(id);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  friend bool operator==(const Assignment&, const Assignment&) = default;
  friend bool operator<(const Assignment& a, const Assignment& b) { return a.values_ < b.values_; }

private:
  std::map<std::string, StalkValue> values_;
};

/// Sheaf of sets on a finite poset.
///
/// Restriction maps are attached to generating arrows. Every covering
/// relation needs one; an arrow that is not a cover (for instance a direct
/// map that shortcuts a chain) may carry its own map too, and then takes
/// part in the commutativity check like any other path. A restriction for a
/// pair without a stored map is the composite along covers.
class Sheaf {
public:
  Sheaf(Poset base, std::vector<StalkSpace> stalks) : base_(std::move(base)), stalks_(std::move(stalks)) {
    if (stalks_.size() != base_.size()) {
      throw StructuralError("sheaf needs one stalk per poset element");
    }
  }

  const Poset& base() const noexcept { return base_; }
  const StalkSpace& stalk(std::size_t i) const { return stalks_.at(i); }
  const StalkSpace& stalk(const std::string& id) const { return stalks_.at(base_.index_of(id)); }
  void set_stalk(const std::string& id, StalkSpace s) { stalks_.at(base_.index_of(id)) = std::move(s); }

  void set_restriction(const std::string& lesser, const std::string& greater, RestrictionMap map,
                       std::string label = {}) {
    const std::size_t p = base_.index_of(lesser);
    const std::size_t q = base_.index_of(greater);
    if (p == q || !base_.leq(p, q)) {
      throw StructuralError("no relation " + lesser + " <= " + greater + " in the base poset");
    }
    maps_[key(p, q)] = Arrow{p, q, std::move(map), std::move(label)};
  }

  bool has_restriction(std::size_t p, std::size_t q) const { return maps_.count(key(p, q)) != 0; }

  /// Stored arrows ending at q, in ascending source order.
  std::vector<std::size_t> arrows_into(std::size_t q) const {
    std::vector<std::size_t> out;
    for (const auto& [k, a] : maps_)
      if (a.to == q) out.push_back(a.from);
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::string& restriction_label(std::size_t p, std::size_t q) const {
    return arrow(p, q).label;
  }

  StalkValue apply(std::size_t p, std::size_t q, const StalkValue& v) const { return arrow(p, q).map(v); }

  /// Covering relations that lack a restriction map.
  std::vector<Relation> missing_restrictions() const {
    std::vector<Relation> out;
    for (const auto& [p, q] : base_.covering_relations())
      if (!has_restriction(p, q)) out.emplace_back(base_.id(p), base_.id(q));
    return out;
  }

  void require_complete() const {
    auto missing = missing_restrictions();
    if (missing.empty()) return;
    std::string msg = "missing restriction map for";
    for (const auto& [a, b] : missing) msg += " (" + a + " <= " + b + ")";
    throw StructuralError(msg);
  }

  /// S(p <= q)(v). Uses the stored map when present, otherwise composes
  /// along the first chain of stored arrows that reaches q.
  StalkValue restrict(std::size_t p, std::size_t q, const StalkValue& v) const {
    if (p == q) return v;
    if (!base_.leq(p, q)) {
      throw StructuralError("no relation " + base_.id(p) + " <= " + base_.id(q));
    }
    if (has_restriction(p, q)) return apply(p, q, v);
    for (std::size_t next : base_.upper_covers(p)) {
      if (!base_.leq(next, q)) continue;
      if (!has_restriction(p, next)) {
        throw StructuralError("missing restriction map for (" + base_.id(p) + " <= " + base_.id(next) + ")");
      }
      return restrict(next, q, apply(p, next, v));
    }
    throw StructuralError("no chain of restrictions from " + base_.id(p) + " to " + base_.id(q));
  }

  StalkValue restrict(const std::string& p, const std::string& q, const StalkValue& v) const {
    return restrict(base_.index_of(p), base_.index_of(q), v);
  }

private:
  struct Arrow {
    std::size_t from;
    std::size_t to;
    RestrictionMap map;
    std::string label;
  };

  std::uint64_t key(std::size_t p, std::size_t q) const {
    return static_cast<std::uint64_t>(p) * (base_.size() + 1) + q;
  }
  const Arrow& arrow(std::size_t p, std::size_t q) const {
    auto it = maps_.find(key(p, q));
    if (it == maps_.end()) {
      throw StructuralError("missing restriction map for (" + base_.id(p) + " <= " + base_.id(q) + ")");
    }
    return it->second;
  }

  Poset base_;
  std::vector<StalkSpace> stalks_;
  std::map<std::uint64_t, Arrow> maps_;
};

// ---------------------------------------------------------------------------
// Commutativity

struct CommutativityViolation {
  std::string lower;
  std::string via_first;   ///< last element before `upper` on the reference path
  std::string via_second;  ///< last element before `upper` on the disagreeing path
  std::string upper;
  double discrepancy = 0.0;
};

struct CommutativityReport {
  bool ok = true;
  std::vector<CommutativityViolation> violations;
  std::size_t points_checked = 0;
};

/// Compares every pair of paths between related elements.
///
/// For each start element p and each probe value (all values of a finite
/// stalk, otherwise `sample_count` draws), values are pushed up through U_p
/// in a linear-extension order. At every element r the value arriving along
/// each stored arrow q -> r is compared with the first arrival; any gap
/// above `tol` is a violation of the triple condition at (p, q, r).
inline CommutativityReport check_commutativity(const Sheaf& sheaf, std::size_t sample_count, double tol,
                                               std::uint64_t seed = 0) {
  sheaf.require_complete();
  const Poset& P = sheaf.base();
  const auto order = P.linear_extension();
  Rng rng(seed);

  CommutativityReport report;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, double> worst;

  for (std::size_t p = 0; p < P.size(); ++p) {
    const StalkSpace& sp = sheaf.stalk(p);
    std::vector<StalkValue> probes;
    if (sp.is_finite()) {
      probes = sp.values();
    } else {
      for (std::size_t s = 0; s < sample_count; ++s) probes.push_back(sp.sample(rng));
    }
    for (const auto& v : probes) {
      ++report.points_checked;
      std::vector<std::optional<StalkValue>> val(P.size());
      val[p] = v;
      for (std::size_t r : order) {
        if (r == p || !P.leq(p, r)) continue;
        std::optional<std::size_t> first_src;
        for (std::size_t q : sheaf.arrows_into(r)) {
          if (!P.leq(p, q) || !val[q]) continue;
          StalkValue arrived = sheaf.apply(q, r, *val[q]);
          if (!first_src) {
            first_src = q;
            val[r] = std::move(arrived);
            continue;
          }
          const double gap = max_abs_diff(*val[r], arrived);
          if (gap > tol) {
            auto k = std::make_tuple(p, *first_src, q, r);
            worst[k] = std::max(worst[k], gap);
          }
        }
      }
    }
  }
  for (const auto& [k, gap] : worst) {
    const auto& [p, q1, q2, r] = k;
    report.violations.push_back({P.id(p), P.id(q1), P.id(q2), P.id(r), gap});
  }
  report.ok = report.violations.empty();
  return report;
}

// ---------------------------------------------------------------------------
// Sections

struct SectionViolation {
  std::string lower;
  std::string upper;  ///< empty when the value at `lower` is outside its stalk
  double discrepancy = 0.0;
};

struct SectionReport {
  bool global = false;
  std::vector<std::string> consistent_on;
  std::vector<SectionViolation> violations;
};

/// Checks an assignment against every relation among assigned elements.
///
/// `consistent_on` is an inclusion-maximal subset of the support on which
/// the assignment is a local section: elements whose value lies outside the
/// stalk are dropped, then the lesser end of each violated relation, then
/// dropped elements are re-admitted greedily where that stays consistent.
inline SectionReport verify_section(const Sheaf& sheaf, const Assignment& s, double tol) {
  const Poset& P = sheaf.base();
  const std::size_t n = P.size();
  std::vector<char> assigned(n, 0), in_stalk(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.contains(P.id(i))) continue;
    assigned[i] = 1;
    in_stalk[i] = sheaf.stalk(i).contains(s.at(P.id(i)), tol) ? 1 : 0;
  }

  SectionReport rep;
  std::vector<std::vector<char>> bad(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    if (assigned[i] && !in_stalk[i]) rep.violations.push_back({P.id(i), {}, 0.0});
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (!assigned[x]) continue;
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y || !assigned[y] || !P.leq(x, y)) continue;
      const double gap = max_abs_diff(sheaf.restrict(x, y, s.at(P.id(x))), s.at(P.id(y)));
      if (gap > tol) {
        bad[x][y] = 1;
        rep.violations.push_back({P.id(x), P.id(y), gap});
      }
    }
  }

  std::vector<char> keep(n, 0);
  for (std::size_t i = 0; i < n; ++i) keep[i] = assigned[i] && in_stalk[i];
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (bad[x][y] && keep[x] && keep[y]) keep[x] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i] || !assigned[i] || !in_stalk[i]) continue;
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j)
      if (keep[j] && (bad[i][j] || bad[j][i])) ok = false;
    if (ok) keep[i] = 1;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) rep.consistent_on.push_back(P.id(i));

  const bool total = std::all_of(assigned.begin(), assigned.end(), [](char c) { return c != 0; });
  rep.global = total && rep.violations.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// DOT export

struct DotCluster {
  std::string name;
  std::vector<std::string> members;
};

namespace detail {
inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

/// Two-line node label "id\nsecond" with DOT's own line break.
inline std::string dot_label(const std::string& id, const std::string& second) {
  std::string q = dot_quote(id);
  q.pop_back();
  return q + "\\n" + dot_quote(second).substr(1);
}
} // namespace detail

/// One digraph: a node per element labelled with its id and stalk,
/// a solid edge per covering relation. Stored maps on non-covering pairs
/// are drawn dashed. An optional cluster draws a box around a sub-diagram.
inline std::string to_dot(const Sheaf& sheaf, const std::string& graph_name = "sheaf",
                          const std::optional<DotCluster>& cluster = std::nullopt) {
  const Poset& P = sheaf.base();
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(graph_name) << " {\n";
  os << "  rankdir=BT;\n";
  std::set<std::string> boxed;
  if (cluster) {
    boxed.insert(cluster->members.begin(), cluster->members.end());
    os << "  subgraph " << detail::dot_quote("cluster_" + cluster->name) << " {\n";
    os << "    label=" << detail::dot_quote(cluster->name) << ";\n";
    for (const auto& m : cluster->members) {
      const std::size_t i = P.index_of(m);
      os << "    " << detail::dot_quote(m) << " [label="
         << detail::dot_label(m, sheaf.stalk(i).describe()) << "];\n";
    }
    os << "  }\n";
  }
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (boxed.count(P.id(i))) continue;
    os << "  " << detail::dot_quote(P.id(i)) << " [label="
       << detail::dot_label(P.id(i), sheaf.stalk(i).describe()) << "];\n";
  }
  for (const auto& [p, q] : P.covering_relations()) {
    os << "  " << detail::dot_quote(P.id(p)) << " -> " << detail::dot_quote(P.id(q));
    if (sheaf.has_restriction(p, q) && !sheaf.restriction_label(p, q).empty()) {
      os << " [label=" << detail::dot_quote(sheaf.restriction_label(p, q)) << "]";
    }
    os << ";\n";
  }
  for (std::size_t q = 0; q < P.size(); ++q)
    for (std::size_t p : sheaf.arrows_into(q))
      if (!P.is_cover(p, q)) {
        os << "  " << detail::dot_quote(P.id(p)) << " -> " << detail::dot_quote(P.id(q)) << " [style=dashed";
        if (!sheaf.restriction_label(p, q).empty()) os << ", label=" << detail::dot_quote(sheaf.restriction_label(p, q));
        os << "];\n";
      }
  os << "}\n";
  return os.str();
}

inline std::string to_dot(const Poset& P, const std::string& graph_name = "poset") {
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(graph_name) << " {\n  rankdir=BT;\n";
  for (const auto& id : P.elements()) os << "  " << detail::dot_quote(id) << ";\n";
  for (const auto& [p, q] : P.covering_relations())
    os << "  " << detail::dot_quote(P.id(p)) << " -> " << detail::dot_quote(P.id(q)) << ";\n";
  os << "}\n";
  return os.str();
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_SHEAF_HPP
