#ifndef SHEAF_GOODWIN_EQUATION_SYSTEM_HPP
#define SHEAF_GOODWIN_EQUATION_SYSTEM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "poset.hpp"
#include "sheaf.hpp"
#include "stalk.hpp"

namespace sheaf_goodwin {

/// Absolute residual below which a real-valued equation counts as satisfied.
inline constexpr double kResidualTolerance = 1e-9;

/// Arguments are the values of an equation's variables, in `vars` order.
using ResidualFn = std::function<double(const std::vector<StalkValue>&)>;
/// Arguments are the values of the *other* variables of the equation, in
/// `vars` order with the target removed.
using SolvedForm = std::function<StalkValue(const std::vector<StalkValue>&)>;

struct Variable {
  std::string name;
  StalkSpace domain;
};

struct Equation {
  std::string id;
  std::vector<std::string> vars;
  ResidualFn residual;
  std::map<std::string, SolvedForm> solved_forms;
  /// Variable this equation defines when the system is read explicitly.
  std::optional<std::string> defines;
  std::string formula;

  /// Solved form for `target` or nullptr.
  const SolvedForm* solved_for(const std::string& target) const {
    auto it = solved_forms.find(target);
    return it == solved_forms.end() ? nullptr : &it->second;
  }

  std::vector<std::string> inputs_for(const std::string& target) const {
    std::vector<std::string> out;
    for (const auto& v : vars)
      if (v != target) out.push_back(v);
    return out;
  }
};

/// Whether time-derivative variables are tied to their state by an arrow.
enum class EncodingMode { pointwise, trajectory };

/// (state, derivative): d/dt of `state` is `derivative`.
struct DerivativeLink {
  std::string state;
  std::string derivative;
};

/// Variables with value spaces W_v plus equations over them.
class EquationSystem {
public:
  EquationSystem() = default;
  explicit EquationSystem(std::string name, EncodingMode mode = EncodingMode::pointwise)
      : name_(std::move(name)), mode_(mode) {}

  EquationSystem& add_variable(std::string name, StalkSpace domain) {
    if (find_variable(name)) throw StructuralError("duplicate variable '" + name + "'");
    variables_.push_back({std::move(name), std::move(domain)});
    return *this;
  }

  EquationSystem& add_equation(Equation e) {
    for (const auto& v : e.vars)
      if (!find_variable(v)) throw StructuralError("equation '" + e.id + "' uses unknown variable '" + v + "'");
    std::set<std::string> uniq(e.vars.begin(), e.vars.end());
    if (uniq.size() != e.vars.size()) throw StructuralError("equation '" + e.id + "' repeats a variable");
    for (const auto& [target, f] : e.solved_forms)
      if (!uniq.count(target)) throw StructuralError("solved form of '" + e.id + "' targets foreign '" + target + "'");
    if (e.defines && !e.solved_for(*e.defines)) {
      throw StructuralError("equation '" + e.id + "' defines '" + *e.defines + "' without a solved form");
    }
    for (const auto& x : equations_)
      if (x.id == e.id) throw StructuralError("duplicate equation id '" + e.id + "'");
    equations_.push_back(std::move(e));
    return *this;
  }

  EquationSystem& add_derivative_link(std::string state, std::string derivative) {
    if (!find_variable(state) || !find_variable(derivative))
      throw StructuralError("derivative link between unknown variables");
    links_.push_back({std::move(state), std::move(derivative)});
    return *this;
  }

  const std::string& name() const noexcept { return name_; }
  EncodingMode mode() const noexcept { return mode_; }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<Equation>& equations() const noexcept { return equations_; }
  const std::vector<DerivativeLink>& derivative_links() const noexcept { return links_; }

  const Variable* find_variable(const std::string& n) const {
    for (const auto& v : variables_)
      if (v.name == n) return &v;
    return nullptr;
  }
  const Variable& variable(const std::string& n) const {
    const Variable* v = find_variable(n);
    if (!v) throw StructuralError("unknown variable '" + n + "'");
    return *v;
  }
  const Equation& equation(const std::string& id) const {
    for (const auto& e : equations_)
      if (e.id == id) return e;
    throw StructuralError("unknown equation '" + id + "'");
  }

  /// Variables that no equation mentions (Prop 5.1 assumes there are none).
  std::vector<std::string> unused_variables() const {
    std::vector<std::string> out;
    for (const auto& v : variables_) {
      bool used = std::any_of(equations_.begin(), equations_.end(), [&](const Equation& e) {
        return std::find(e.vars.begin(), e.vars.end(), v.name) != e.vars.end();
      });
      if (!used) out.push_back(v.name);
    }
    return out;
  }

  /// Residual of `e` at a full variable assignment.
  double residual(const Equation& e, const Assignment& values) const {
    std::vector<StalkValue> args;
    args.reserve(e.vars.size());
    for (const auto& v : e.vars) args.push_back(values.at(v));
    return e.residual(args);
  }

  bool satisfied_by(const Assignment& values, double tol = kResidualTolerance) const {
    return std::all_of(equations_.begin(), equations_.end(),
                       [&](const Equation& e) { return std::abs(residual(e, values)) <= tol; });
  }

  /// Injective choice gamma: equation id -> variable it is solved for.
  ///
  /// Found by bipartite matching over the available solved forms, trying
  /// each equation's `defines` first. Throws ExplicitnessError when no
  /// injective choice exists.
  std::map<std::string, std::string> explicit_targets() const {
    const std::size_t m = equations_.size();
    std::vector<std::vector<std::string>> options(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& e = equations_[i];
      if (e.defines) options[i].push_back(*e.defines);
      for (const auto& v : e.vars)
        if (e.solved_for(v) && (!e.defines || v != *e.defines)) options[i].push_back(v);
      if (options[i].empty()) throw ExplicitnessError("equation '" + e.id + "' has no solved form");
    }
    std::map<std::string, std::size_t> owner;
    std::function<bool(std::size_t, std::set<std::string>&)> augment = [&](std::size_t i, std::set<std::string>& seen) {
      for (const auto& v : options[i]) {
        if (!seen.insert(v).second) continue;
        auto it = owner.find(v);
        if (it == owner.end() || augment(it->second, seen)) {
          owner[v] = i;
          return true;
        }
      }
      return false;
    };
    for (std::size_t i = 0; i < m; ++i) {
      std::set<std::string> seen;
      if (!augment(i, seen)) {
        throw ExplicitnessError("system '" + name_ + "' is not explicit: no injective choice of solved variable "
                                "covers equation '" + equations_[i].id + "'");
      }
    }
    std::map<std::string, std::string> gamma;
    for (const auto& [v, i] : owner) gamma[equations_[i].id] = v;
    return gamma;
  }

  bool is_explicit() const {
    try {
      (void)explicit_targets();
      return true;
    } catch (const ExplicitnessError&) {
      return false;
    }
  }

private:
  std::string name_;
  EncodingMode mode_ = EncodingMode::pointwise;
  std::vector<Variable> variables_;
  std::vector<Equation> equations_;
  std::vector<DerivativeLink> links_;
};

/// Trajectory-mode copy of a pointwise system on an `n`-point time grid.
///
/// Each variable's stalk becomes R^n (a sampled series, coordinates drawn
/// from the pointwise domain); residuals take the max over grid points and
/// solved forms apply pointwise.
inline EquationSystem lift_to_trajectories(const EquationSystem& pointwise, std::size_t n) {
  if (n < 3) throw StructuralError("trajectory grid needs at least 3 points");
  EquationSystem out(pointwise.name() + ".trajectory", EncodingMode::trajectory);
  for (const auto& v : pointwise.variables()) {
    if (v.domain.dimension() != 1) throw UnsupportedError("lifting needs scalar variables");
    const StalkSpace base = v.domain;
    StalkSpace series = StalkSpace::real_vector(n, -1.0, 1.0, "C(" + v.name + ")")
                            .with_sampler([base, n](Rng& rng) {
                              StalkValue x(n);
                              for (auto& c : x) c = base.sample(rng)[0];
                              return x;
                            })
                            .restricted([base](const StalkValue& x) {
                              return std::all_of(x.begin(), x.end(),
                                                 [&](double c) { return base.contains({c}); });
                            });
    out.add_variable(v.name, std::move(series));
  }
  auto column = [](const std::vector<StalkValue>& args, std::size_t k) {
    std::vector<StalkValue> col;
    col.reserve(args.size());
    for (const auto& a : args) col.push_back({a[k]});
    return col;
  };
  for (const auto& e : pointwise.equations()) {
    Equation lifted;
    lifted.id = e.id;
    lifted.vars = e.vars;
    lifted.defines = e.defines;
    lifted.formula = e.formula;
    const ResidualFn r = e.residual;
    lifted.residual = [r, n, column](const std::vector<StalkValue>& args) {
      double worst = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double x = std::abs(r(column(args, k)));
        if (!(x <= worst)) worst = x;  // NaN propagates
      }
      return worst;
    };
    for (const auto& [target, f] : e.solved_forms) {
      lifted.solved_forms[target] = [f, n, column](const std::vector<StalkValue>& args) {
        StalkValue out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = f(column(args, k))[0];
        return out;
      };
    }
    out.add_equation(std::move(lifted));
  }
  for (const auto& l : pointwise.derivative_links()) out.add_derivative_link(l.state, l.derivative);
  return out;
}

// ---------------------------------------------------------------------------
// Poset and sheaves

/// V ⊔ E with e <= v whenever v occurs in e. Trajectory-mode systems also
/// get state <= derivative for each derivative link.
inline Poset build_poset(const EquationSystem& sys) {
  std::vector<std::string> elements;
  std::vector<Relation> rel;
  for (const auto& v : sys.variables()) elements.push_back(v.name);
  for (const auto& e : sys.equations()) {
    elements.push_back(e.id);
    for (const auto& v : e.vars) rel.emplace_back(e.id, v);
  }
  if (sys.mode() == EncodingMode::trajectory)
    for (const auto& l : sys.derivative_links()) rel.emplace_back(l.state, l.derivative);
  return Poset(std::move(elements), rel);
}

namespace detail {

inline std::vector<StalkValue> split(const StalkValue& tuple, const std::vector<std::size_t>& dims) {
  std::vector<StalkValue> parts;
  parts.reserve(dims.size());
  std::size_t off = 0;
  for (std::size_t d : dims) {
    parts.emplace_back(tuple.begin() + static_cast<std::ptrdiff_t>(off),
                       tuple.begin() + static_cast<std::ptrdiff_t>(off + d));
    off += d;
  }
  return parts;
}

inline RestrictionMap projection(std::size_t offset, std::size_t dim) {
  return [offset, dim](const StalkValue& t) {
    return StalkValue(t.begin() + static_cast<std::ptrdiff_t>(offset),
                      t.begin() + static_cast<std::ptrdiff_t>(offset + dim));
  };
}

/// Second-order central differences on a uniform grid, one-sided at the ends.
inline StalkValue finite_difference(const StalkValue& x, double dt) {
  const std::size_t n = x.size();
  StalkValue d(n, 0.0);
  if (n < 3) return d;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
  d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
  d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
  return d;
}

inline void add_derivative_arrows(Sheaf& sh, const EquationSystem& sys, double dt) {
  if (sys.mode() != EncodingMode::trajectory) return;
  for (const auto& l : sys.derivative_links())
    sh.set_restriction(l.state, l.derivative, [dt](const StalkValue& x) { return finite_difference(x, dt); },
                       "d/dt");
}

inline std::vector<StalkSpace> variable_stalks(const EquationSystem& sys, const Poset& P) {
  std::vector<StalkSpace> stalks(P.size(), StalkSpace::real_vector(1));
  for (const auto& v : sys.variables()) stalks[P.index_of(v.name)] = v.domain;
  return stalks;
}

} // namespace detail

/// Grid spacing used by d/dt arrows in trajectory mode.
struct TrajectoryGrid {
  double dt = 1e-3;
};

/// E': stalk W_v at variables, the full product at equations, projections.
inline Sheaf build_product_sheaf(const EquationSystem& sys, TrajectoryGrid grid = {}) {
  Poset P = build_poset(sys);
  auto stalks = detail::variable_stalks(sys, P);
  for (const auto& e : sys.equations()) {
    std::vector<StalkSpace> factors;
    for (const auto& v : e.vars) factors.push_back(sys.variable(v).domain);
    stalks[P.index_of(e.id)] = StalkSpace::product(factors, "prod(" + e.id + ")");
  }
  Sheaf sh(P, std::move(stalks));
  for (const auto& e : sys.equations()) {
    std::size_t off = 0;
    for (const auto& v : e.vars) {
      const std::size_t d = sys.variable(v).domain.dimension();
      sh.set_restriction(e.id, v, detail::projection(off, d), "pr");
      off += d;
    }
  }
  detail::add_derivative_arrows(sh, sys, grid.dt);
  return sh;
}

/// E: like E' but each equation stalk is the solution set S_e.
///
/// Finite stalks are filtered exactly; real stalks get a membership
/// predicate (|residual| <= 1e-9) and, when the equation has a solved form,
/// a sampler that draws points of S_e. Empty finite S_e are reported in
/// `warnings`.
inline Sheaf build_solution_sheaf(const EquationSystem& sys, std::vector<std::string>* warnings = nullptr,
                                  TrajectoryGrid grid = {}) {
  Sheaf sh = build_product_sheaf(sys, grid);
  for (const auto& e : sys.equations()) {
    std::vector<std::size_t> dims;
    for (const auto& v : e.vars) dims.push_back(sys.variable(v).domain.dimension());
    auto residual = e.residual;
    auto on_solution_set = [residual, dims](const StalkValue& t) {
      return std::abs(residual(detail::split(t, dims))) <= kResidualTolerance;
    };
    StalkSpace s = sh.stalk(e.id).restricted(on_solution_set, "S(" + e.id + ")");
    if (!s.is_finite() && !e.solved_forms.empty()) {
      const std::string target = e.defines ? *e.defines : e.solved_forms.begin()->first;
      const SolvedForm f = e.solved_forms.at(target);
      std::vector<StalkSpace> inputs;
      for (const auto& v : e.vars)
        if (v != target) inputs.push_back(sys.variable(v).domain);
      const auto vars = e.vars;
      s = s.with_sampler([inputs, f, vars, target, dims](Rng& rng) {
        std::vector<StalkValue> in_vals;
        for (const auto& in : inputs) in_vals.push_back(in.sample(rng));
        const StalkValue out = f(in_vals);
        StalkValue tuple;
        std::size_t k = 0;
        for (const auto& v : vars) {
          const StalkValue& piece = (v == target) ? out : in_vals[k++];
          tuple.insert(tuple.end(), piece.begin(), piece.end());
        }
        return tuple;
      });
    }
    if (s.is_empty() && warnings) {
      warnings->push_back("equation '" + e.id + "' has an empty solution set");
    }
    sh.set_stalk(e.id, std::move(s));
  }
  return sh;
}

/// G: the explicit solution sheaf. Stalk at e is the product over the inputs
/// of e; the arrow to gamma(e) applies the solved form, the others project.
inline Sheaf build_explicit_solution_sheaf(const EquationSystem& sys, TrajectoryGrid grid = {}) {
  const auto gamma = sys.explicit_targets();
  Poset P = build_poset(sys);
  auto stalks = detail::variable_stalks(sys, P);
  for (const auto& e : sys.equations()) {
    std::vector<StalkSpace> factors;
    for (const auto& v : e.inputs_for(gamma.at(e.id))) factors.push_back(sys.variable(v).domain);
    stalks[P.index_of(e.id)] = factors.empty() ? StalkSpace::finite_set({StalkValue{}}, "point")
                                               : StalkSpace::product(factors, "inputs(" + e.id + ")");
  }
  Sheaf sh(P, std::move(stalks));
  for (const auto& e : sys.equations()) {
    const std::string& target = gamma.at(e.id);
    const auto inputs = e.inputs_for(target);
    std::vector<std::size_t> dims;
    for (const auto& v : inputs) dims.push_back(sys.variable(v).domain.dimension());
    const SolvedForm f = *e.solved_for(target);
    sh.set_restriction(e.id, target, [f, dims](const StalkValue& t) { return f(detail::split(t, dims)); }, "f");
    std::size_t off = 0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      sh.set_restriction(e.id, inputs[k], detail::projection(off, dims[k]), "pr");
      off += dims[k];
    }
  }
  detail::add_derivative_arrows(sh, sys, grid.dt);
  return sh;
}

// ---------------------------------------------------------------------------
// Section enumeration

/// All global sections of a sheaf whose stalks are all finite.
///
/// Backtracks over elements in a linear-extension order. An element with an
/// assigned predecessor has its value forced by the restriction; otherwise
/// every stalk value is tried.
inline std::vector<Assignment> enumerate_sections(const Sheaf& sheaf) {
  const Poset& P = sheaf.base();
  for (std::size_t i = 0; i < P.size(); ++i)
    if (!sheaf.stalk(i).is_finite())
      throw UnsupportedError("enumerate_sections needs finite stalks; '" + P.id(i) + "' is " +
                             to_string(sheaf.stalk(i).kind()));
  sheaf.require_complete();
  const auto order = P.linear_extension();
  std::vector<std::vector<std::size_t>> preds(P.size());
  for (std::size_t i = 0; i < P.size(); ++i)
    for (std::size_t j = 0; j < P.size(); ++j)
      if (i != j && P.leq(j, i)) preds[i].push_back(j);

  std::vector<StalkValue> val(P.size());
  std::vector<Assignment> out;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == order.size()) {
      Assignment a;
      for (std::size_t i = 0; i < P.size(); ++i) a.set(P.id(i), val[i]);
      out.push_back(std::move(a));
      return;
    }
    const std::size_t x = order[k];
    if (preds[x].empty()) {
      for (const auto& v : sheaf.stalk(x).values()) {
        val[x] = v;
        rec(k + 1);
      }
      return;
    }
    StalkValue forced = sheaf.restrict(preds[x].front(), x, val[preds[x].front()]);
    if (!sheaf.stalk(x).contains(forced)) return;
    for (std::size_t q = 1; q < preds[x].size(); ++q)
      if (max_abs_diff(sheaf.restrict(preds[x][q], x, val[preds[x][q]]), forced) > 0.0) return;
    // Stored non-cover arrows into x must agree as well.
    for (std::size_t q : sheaf.arrows_into(x))
      if (max_abs_diff(sheaf.apply(q, x, val[q]), forced) > 0.0) return;
    val[x] = std::move(forced);
    rec(k + 1);
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

/// Restricts a section to the system's variables.
inline Assignment variable_part(const EquationSystem& sys, const Assignment& section) {
  Assignment a;
  for (const auto& v : sys.variables()) a.set(v.name, section.at(v.name));
  return a;
}

// ---------------------------------------------------------------------------
// Dependency graphs

struct DependencyNode {
  std::string name;
  bool free = false;                 ///< free variable (outside the image of gamma)
  std::optional<std::string> equation;  ///< equation the node stands for
};

struct DependencyGraph {
  std::vector<DependencyNode> nodes;
  std::vector<std::pair<std::string, std::string>> edges;

  std::size_t in_degree(const std::string& n) const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(),
                                                  [&](const auto& e) { return e.second == n; }));
  }
  bool has_edge(const std::string& a, const std::string& b) const {
    return std::find(edges.begin(), edges.end(), std::pair{a, b}) != edges.end();
  }
  bool has_node(const std::string& n) const {
    return std::any_of(nodes.begin(), nodes.end(), [&](const DependencyNode& d) { return d.name == n; });
  }

  std::string to_dot(const std::string& graph_name = "dependencies") const {
    std::ostringstream os;
    os << "digraph " << detail::dot_quote(graph_name) << " {\n";
    for (const auto& n : nodes)
      os << "  " << detail::dot_quote(n.name) << " [shape=" << (n.free ? "box" : "ellipse") << "];\n";
    for (const auto& [a, b] : edges) os << "  " << detail::dot_quote(a) << " -> " << detail::dot_quote(b) << ";\n";
    os << "}\n";
    return os.str();
  }
};

/// Variable dependency graph of an explicit system.
///
/// Vertices are the equations (named by the variable they define) and the
/// free variables; an edge x -> e means the solved form of e reads x. With
/// `collapse_derivatives`, each derivative is merged into its state, which
/// gives the state-level picture (u -> v meaning u feeds the evolution of v).
inline DependencyGraph dependency_graph(const EquationSystem& sys, bool collapse_derivatives = false) {
  const auto gamma = sys.explicit_targets();
  std::set<std::string> defined;
  for (const auto& [e, v] : gamma) defined.insert(v);

  std::map<std::string, std::string> rename;
  if (collapse_derivatives)
    for (const auto& l : sys.derivative_links()) rename[l.derivative] = l.state;
  auto node_of = [&](const std::string& v) {
    auto it = rename.find(v);
    return it == rename.end() ? v : it->second;
  };

  DependencyGraph g;
  std::set<std::string> seen;
  auto add_node = [&](DependencyNode n) {
    if (!seen.insert(n.name).second) {
      for (auto& m : g.nodes)
        if (m.name == n.name && n.equation) {
          m.equation = n.equation;
          m.free = false;
        }
      return;
    }
    g.nodes.push_back(std::move(n));
  };
  for (const auto& v : sys.variables())
    if (!defined.count(v.name)) add_node({node_of(v.name), true, std::nullopt});
  for (const auto& e : sys.equations()) add_node({node_of(gamma.at(e.id)), false, e.id});
  for (const auto& e : sys.equations()) {
    const std::string target = node_of(gamma.at(e.id));
    for (const auto& in : e.inputs_for(gamma.at(e.id))) {
      std::pair<std::string, std::string> edge{node_of(in), target};
      if (!g.has_edge(edge.first, edge.second)) g.edges.push_back(edge);
    }
  }
  return g;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_EQUATION_SYSTEM_HPP
