#ifndef SHEAF_GOODWIN_SECTIONS_EXTENSION_HPP
#define SHEAF_GOODWIN_SECTIONS_EXTENSION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "../equation_system.hpp"
#include "../numerics.hpp"

namespace sheaf_goodwin {

// ---------------------------------------------------------------------------
// Sub-diagrams and degrees of freedom

struct SubDiagram {
  std::vector<std::string> equations;
  std::vector<std::string> variables;  ///< union of the equations' variables
  Poset poset;
};

inline SubDiagram sub_diagram(const EquationSystem& sys, const std::vector<std::string>& equation_ids) {
  SubDiagram s;
  std::vector<std::string> elements;
  std::vector<Relation> rel;
  std::set<std::string> seen;
  for (const auto& id : equation_ids) {
    const Equation& e = sys.equation(id);
    s.equations.push_back(id);
    for (const auto& v : e.vars) {
      if (seen.insert(v).second) s.variables.push_back(v);
      rel.emplace_back(id, v);
    }
  }
  elements = s.variables;
  elements.insert(elements.end(), s.equations.begin(), s.equations.end());
  s.poset = Poset(std::move(elements), rel);
  return s;
}

/// Variables minus equations. A negative count is returned as is and noted
/// in `warnings` as overdetermined.
inline int degrees_of_freedom(const SubDiagram& sub, std::vector<std::string>* warnings = nullptr) {
  const int dof = static_cast<int>(sub.variables.size()) - static_cast<int>(sub.equations.size());
  if (dof < 0 && warnings) warnings->push_back("overdetermined sub-diagram: " + std::to_string(dof));
  return dof;
}

// ---------------------------------------------------------------------------
// Local-section extension

enum class ExtensionMode { structural, numeric };

inline const char* to_string(ExtensionMode m) { return m == ExtensionMode::structural ? "structural" : "numeric"; }

struct DeterminedVariable {
  std::string variable;
  std::string via;     ///< equation id, or ids joined by '+' for a square block
  std::size_t round = 0;
  std::optional<double> value;  ///< numeric mode only, absent when ambiguous upstream
};

struct Conflict {
  std::string equation;
  double residual = 0.0;
};

struct Ambiguity {
  std::vector<std::string> variables;
  std::vector<std::string> equations;
  std::string reason;
  std::size_t solutions_found = 0;
  /// Complete extensions that each satisfy every fully valued equation.
  std::vector<Assignment> witnesses;
  std::vector<double> witness_residuals;  ///< max |residual| per witness
};

struct ExtensionResult {
  ExtensionMode mode = ExtensionMode::structural;
  Assignment asserted;
  std::vector<DeterminedVariable> determined;
  std::vector<std::string> still_free;
  int dof_consumed = 0;
  std::vector<Conflict> conflicts;
  std::vector<Ambiguity> ambiguities;

  bool is_determined(const std::string& v) const {
    return std::any_of(determined.begin(), determined.end(), [&](const auto& d) { return d.variable == v; });
  }
  /// Asserted and determined values together.
  Assignment values() const {
    Assignment a = asserted;
    for (const auto& d : determined)
      if (d.value) a.set_scalar(d.variable, *d.value);
    return a;
  }
};

struct ExtensionOptions {
  double conflict_tol = kResidualTolerance;
  /// Root-finding bracket per variable.
  std::function<std::pair<double, double>(const std::string&)> bracket = default_bracket;
  int grid = 2000;
  int max_witness_depth = 1;

  /// Derivatives (-100, 100); prices (0, 100); everything else (0, 2).
  static std::pair<double, double> default_bracket(const std::string& name) {
    const auto dot = name.rfind('.');
    const std::string base = dot == std::string::npos ? name : name.substr(dot + 1);
    if (base.size() > 4 && base.compare(base.size() - 4, 4, "_dot") == 0) return {-100.0, 100.0};
    if (!base.empty() && base[0] == 'p') return {0.0, 100.0};
    return {0.0, 2.0};
  }
};

namespace detail {

/// Equations whose unknown sets admit a perfect matching onto exactly as
/// many unknowns: the smallest such group in lexicographic order.
inline std::optional<std::vector<std::size_t>> find_square_block(
    const std::vector<std::size_t>& pending, const std::vector<std::set<std::string>>& unknowns) {
  const std::size_t p = pending.size();
  const std::size_t cap = std::min<std::size_t>(p, 12);
  for (std::size_t k = 2; k <= cap; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      std::set<std::string> U;
      for (std::size_t i : idx) U.insert(unknowns[pending[i]].begin(), unknowns[pending[i]].end());
      if (U.size() == k) {
        // Kuhn matching equations -> unknowns.
        std::map<std::string, std::size_t> owner;
        std::function<bool(std::size_t, std::set<std::string>&)> aug = [&](std::size_t i, std::set<std::string>& seen) {
          for (const auto& v : unknowns[pending[idx[i]]]) {
            if (!seen.insert(v).second) continue;
            auto it = owner.find(v);
            if (it == owner.end() || aug(it->second, seen)) {
              owner[v] = i;
              return true;
            }
          }
          return false;
        };
        bool perfect = true;
        for (std::size_t i = 0; i < k && perfect; ++i) {
          std::set<std::string> seen;
          perfect = aug(i, seen);
        }
        if (perfect) {
          std::vector<std::size_t> out;
          for (std::size_t i : idx) out.push_back(pending[i]);
          return out;
        }
      }
      // next combination
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == p - k + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return std::nullopt;
}

class Chase {
public:
  Chase(const EquationSystem& sys, const ExtensionOptions& opts, ExtensionMode mode, int depth)
      : sys_(sys), opts_(opts), mode_(mode), depth_(depth) {}

  ExtensionResult run(const Assignment& asserted) {
    ExtensionResult r;
    r.mode = mode_;
    r.asserted = asserted;
    r.dof_consumed = static_cast<int>(asserted.size());
    for (const auto& [name, value] : asserted) {
      const Variable& v = sys_.variable(name);
      if (!v.domain.contains(value)) throw DomainError("asserted value of '" + name + "' lies outside its domain");
      known_[name] = value.size() == 1 ? std::optional<double>(value[0]) : std::nullopt;
    }
    std::size_t round = 0;
    while (true) {
      ++round;
      std::vector<std::set<std::string>> unk(sys_.equations().size());
      std::vector<std::size_t> pending, singles;
      for (std::size_t i = 0; i < sys_.equations().size(); ++i) {
        for (const auto& v : sys_.equations()[i].vars)
          if (!known_.count(v)) unk[i].insert(v);
        if (unk[i].size() == 1) singles.push_back(i);
        if (!unk[i].empty()) pending.push_back(i);
      }
      if (!singles.empty()) {
        for (std::size_t i : singles) {
          const std::string x = *unk[i].begin();
          if (known_.count(x)) continue;  // set earlier this round; e becomes a check
          solve_single(sys_.equations()[i], x, round, r);
        }
        continue;
      }
      auto block = find_square_block(pending, unk);
      if (!block) break;
      std::set<std::string> U;
      for (std::size_t i : *block) U.insert(unk[i].begin(), unk[i].end());
      solve_block(*block, std::vector<std::string>(U.begin(), U.end()), round, r);
    }
    for (const auto& v : sys_.variables())
      if (!known_.count(v.name)) r.still_free.push_back(v.name);
    if (mode_ == ExtensionMode::numeric) collect_conflicts(r);
    return r;
  }

private:
  std::optional<std::vector<double>> inputs_of(const Equation& e, const std::string& target) const {
    std::vector<double> in;
    for (const auto& v : e.vars) {
      if (v == target) continue;
      const auto& k = known_.at(v);
      if (!k) return std::nullopt;
      in.push_back(*k);
    }
    return in;
  }

  double residual_with(const Equation& e, const std::map<std::string, double>& extra) const {
    std::vector<StalkValue> args;
    for (const auto& v : e.vars) {
      auto it = extra.find(v);
      args.push_back({it != extra.end() ? it->second : *known_.at(v)});
    }
    return e.residual(args);
  }

  void solve_single(const Equation& e, const std::string& x, std::size_t round, ExtensionResult& r) {
    DeterminedVariable d{x, e.id, round, std::nullopt};
    if (mode_ == ExtensionMode::numeric) {
      if (auto in = inputs_of(e, x)) {
        d.value = closed_form(e, x, *in);
        if (!d.value) {
          const auto [lo, hi] = opts_.bracket(x);
          auto f = [&](double z) { return residual_with(e, {{x, z}}); };
          const auto roots = find_roots(f, lo, hi, opts_.grid);
          if (roots.size() == 1) {
            d.value = roots.front();
          } else {
            Ambiguity a;
            a.variables = {x};
            a.equations = {e.id};
            a.solutions_found = roots.size();
            a.reason = roots.empty() ? "no root in bracket" : std::to_string(roots.size()) + " roots in bracket";
            for (std::size_t k = 0; k < std::min<std::size_t>(2, roots.size()); ++k) add_witness(a, {{x, roots[k]}});
            r.ambiguities.push_back(std::move(a));
          }
        }
      }
    }
    known_[x] = d.value;
    r.determined.push_back(std::move(d));
  }

  std::optional<double> closed_form(const Equation& e, const std::string& x, const std::vector<double>& in) const {
    const SolvedForm* f = e.solved_for(x);
    if (!f) return std::nullopt;
    std::vector<StalkValue> args;
    for (double c : in) args.push_back({c});
    const StalkValue out = (*f)(args);
    if (out.size() != 1 || !std::isfinite(out[0])) return std::nullopt;
    if (!(std::abs(residual_with(e, {{x, out[0]}})) <= opts_.conflict_tol)) return std::nullopt;
    return out[0];
  }

  // Square block -------------------------------------------------------------

  using Vec = Eigen::VectorXd;

  Vec block_residual(const std::vector<std::size_t>& eqs, const std::vector<std::string>& xs, const Vec& z) const {
    std::map<std::string, double> extra;
    for (std::size_t i = 0; i < xs.size(); ++i) extra[xs[i]] = z(static_cast<Eigen::Index>(i));
    Vec F(static_cast<Eigen::Index>(eqs.size()));
    for (std::size_t i = 0; i < eqs.size(); ++i)
      F(static_cast<Eigen::Index>(i)) = residual_with(sys_.equations()[eqs[i]], extra);
    return F;
  }

  Eigen::MatrixXd block_jacobian(const std::vector<std::size_t>& eqs, const std::vector<std::string>& xs,
                                 const Vec& z) const {
    const auto k = z.size();
    Eigen::MatrixXd J(static_cast<Eigen::Index>(eqs.size()), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(z(j)));
      Vec zp = z, zm = z;
      zp(j) += h;
      zm(j) -= h;
      J.col(j) = (block_residual(eqs, xs, zp) - block_residual(eqs, xs, zm)) / (2 * h);
    }
    return J;
  }

  bool in_brackets(const std::vector<std::string>& xs, const Vec& z) const {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto [lo, hi] = opts_.bracket(xs[i]);
      const double c = z(static_cast<Eigen::Index>(i));
      if (!(c > lo && c < hi)) return false;
    }
    return true;
  }

  /// Damped Gauss-Newton with minimum-norm steps, so rank-deficient blocks
  /// land on the nearest point of the solution set.
  std::optional<Vec> newton(const std::vector<std::size_t>& eqs, const std::vector<std::string>& xs, Vec z) const {
    Vec F = block_residual(eqs, xs, z);
    if (!F.allFinite()) return std::nullopt;
    for (int it = 0; it < 100; ++it) {
      if (F.cwiseAbs().maxCoeff() < 1e-14) break;
      const Eigen::MatrixXd J = block_jacobian(eqs, xs, z);
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
      cod.setThreshold(1e-8);  // treat finite-difference noise as rank loss
      cod.compute(J);
      const Vec step = -cod.solve(F);
      double t = 1.0;
      bool moved = false;
      for (int h = 0; h < 40; ++h, t *= 0.5) {
        const Vec zn = z + t * step;
        const Vec Fn = block_residual(eqs, xs, zn);
        if (Fn.allFinite() && Fn.norm() < F.norm()) {
          z = zn;
          F = Fn;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (!(F.cwiseAbs().maxCoeff() <= 1e-2 * opts_.conflict_tol) || !in_brackets(xs, z)) return std::nullopt;
    return z;
  }

  void solve_block(const std::vector<std::size_t>& eqs, const std::vector<std::string>& xs, std::size_t round,
                   ExtensionResult& r) {
    std::string via;
    for (std::size_t i : eqs) via += (via.empty() ? "" : "+") + sys_.equations()[i].id;
    std::vector<std::optional<double>> values(xs.size());

    bool inputs_valued = mode_ == ExtensionMode::numeric;
    if (inputs_valued)
      for (std::size_t i : eqs)
        for (const auto& v : sys_.equations()[i].vars)
          if (known_.count(v) && !known_.at(v)) inputs_valued = false;

    if (inputs_valued) {
      const auto k = static_cast<Eigen::Index>(xs.size());
      std::optional<Vec> sol;
      for (const Vec& start : starts(xs)) {
        if ((sol = newton(eqs, xs, start))) break;
      }
      Ambiguity a;
      a.variables = xs;
      for (std::size_t i : eqs) a.equations.push_back(sys_.equations()[i].id);
      if (!sol) {
        a.reason = "no simultaneous solution in bracket";
        r.ambiguities.push_back(std::move(a));
      } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(block_jacobian(eqs, xs, *sol), Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        int rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
          if (s(i) > 1e-8 * std::max(1.0, s(0))) ++rank;
        if (rank == k) {
          for (Eigen::Index i = 0; i < k; ++i) values[static_cast<std::size_t>(i)] = (*sol)(i);
        } else {
          const Vec null_dir = svd.matrixV().col(k - 1);
          std::optional<Vec> other;
          for (double delta : {0.2, -0.2, 0.1, -0.1, 0.05, -0.05, 0.01, -0.01}) {
            if (auto z2 = newton(eqs, xs, *sol + delta * null_dir); z2 && (*z2 - *sol).norm() > 1e-6) {
              other = z2;
              break;
            }
          }
          a.reason = "rank-deficient block: Jacobian rank " + std::to_string(rank) + " < " + std::to_string(k);
          a.solutions_found = other ? 2 : 1;
          std::map<std::string, double> w1, w2;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            w1[xs[i]] = (*sol)(static_cast<Eigen::Index>(i));
            if (other) w2[xs[i]] = (*other)(static_cast<Eigen::Index>(i));
          }
          add_witness(a, w1);
          if (other) add_witness(a, w2);
          r.ambiguities.push_back(std::move(a));
        }
      }
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      known_[xs[i]] = values[i];
      r.determined.push_back({xs[i], via, round, values[i]});
    }
  }

  std::vector<Vec> starts(const std::vector<std::string>& xs) const {
    const std::size_t k = xs.size();
    std::vector<Vec> out;
    Vec mid(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
      const auto [lo, hi] = opts_.bracket(xs[i]);
      mid(static_cast<Eigen::Index>(i)) = 0.5 * (lo + hi);
    }
    out.push_back(mid);
    if (k > 3) return out;
    // 3^k grid at the quarter points and the midpoint.
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      Vec z(static_cast<Eigen::Index>(k));
      std::size_t c = code;
      for (std::size_t i = 0; i < k; ++i, c /= 3) {
        const auto [lo, hi] = opts_.bracket(xs[i]);
        z(static_cast<Eigen::Index>(i)) = lo + (hi - lo) * (0.25 + 0.25 * static_cast<double>(c % 3));
      }
      out.push_back(z);
    }
    return out;
  }

  // Witnesses ----------------------------------------------------------------

  void add_witness(Ambiguity& a, const std::map<std::string, double>& choice) {
    Assignment seed;
    for (const auto& [name, v] : known_)
      if (v) seed.set_scalar(name, *v);
    for (const auto& [name, v] : choice) seed.set_scalar(name, v);
    Assignment full = seed;
    if (depth_ < opts_.max_witness_depth) {
      Chase inner(sys_, opts_, ExtensionMode::numeric, depth_ + 1);
      full = inner.run(seed).values();
    }
    double worst = 0.0;
    for (const auto& e : sys_.equations()) {
      bool all = std::all_of(e.vars.begin(), e.vars.end(), [&](const auto& v) { return full.contains(v); });
      if (!all) continue;
      const double res = std::abs(sys_.residual(e, full));
      if (!(res <= worst)) worst = res;
    }
    a.witnesses.push_back(std::move(full));
    a.witness_residuals.push_back(worst);
  }

  void collect_conflicts(ExtensionResult& r) const {
    for (const auto& e : sys_.equations()) {
      bool valued = std::all_of(e.vars.begin(), e.vars.end(),
                                [&](const auto& v) { return known_.count(v) && known_.at(v).has_value(); });
      if (!valued) continue;
      const double res = residual_with(e, {});
      if (!(std::abs(res) <= opts_.conflict_tol)) r.conflicts.push_back({e.id, res});
    }
  }

  const EquationSystem& sys_;
  const ExtensionOptions& opts_;
  ExtensionMode mode_;
  int depth_;
  std::map<std::string, std::optional<double>> known_;
};

} // namespace detail

/// Extends an asserted partial assignment through the pointwise system.
///
/// Each round determines every variable that is the only unknown of some
/// equation. When no such equation remains, the smallest group of k
/// equations with exactly k unknowns between them (and a perfect matching)
/// is solved jointly. Structural mode only tracks which variables become
/// determined. Numeric mode also computes values: closed-form inverses when
/// available, else bisection in the variable's bracket, and Gauss-Newton for
/// joint groups. A group whose Jacobian is rank-deficient at the solution
/// is reported as an ambiguity with two distinct witnesses.
inline ExtensionResult extend_local_section(const EquationSystem& sys, const Assignment& asserted, ExtensionMode mode,
                                            const ExtensionOptions& opts = {}) {
  detail::Chase chase(sys, opts, mode, 0);
  return chase.run(asserted);
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_SECTIONS_EXTENSION_HPP
