// Shared generators and brute-force oracles for the test binaries.
#ifndef SHEAF_GOODWIN_TESTS_SUPPORT_HPP
#define SHEAF_GOODWIN_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sheaf_goodwin/equation_system.hpp"
#include "sheaf_goodwin/models/goodwin.hpp"

namespace testsupport {

using namespace sheaf_goodwin;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline std::size_t index_below(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Goodwin parameters drawn until 1/sigma - (alpha+beta) > 0.
inline GoodwinParams random_goodwin_params(Rng& rng) {
  for (;;) {
    GoodwinParams g;
    g.alpha = uniform(rng, 0.0, 0.05);
    g.beta = uniform(rng, 0.0, 0.05);
    g.gamma = uniform(rng, 0.005, 0.1);
    g.rho = uniform(rng, 0.05, 0.5);
    g.sigma = uniform(rng, 0.5, 6.0);
    if (g.natural_growth() > 1e-3) return g;
  }
}

/// Lookup table over the joint values of `inputs`, keyed by their scalars.
using Table = std::map<std::vector<double>, double>;

inline std::vector<std::vector<double>> cartesian(const std::vector<std::vector<double>>& sets) {
  std::vector<std::vector<double>> out{{}};
  for (const auto& s : sets) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out)
      for (double x : s) {
        auto p = prefix;
        p.push_back(x);
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

/// A finite system with at most `max_vars` variables over stalks of size
/// <= `max_stalk`. With `explicit_only` every equation is
/// target = table(inputs) with distinct targets; otherwise each equation is
/// an arbitrary relation given by its satisfying tuples.
struct FiniteSystem {
  EquationSystem sys;
  std::map<std::string, std::vector<double>> domains;
};

inline FiniteSystem random_finite_system(Rng& rng, bool explicit_only, std::size_t max_vars = 4,
                                         std::size_t max_stalk = 3) {
  FiniteSystem f;
  f.sys = EquationSystem("random");
  const std::size_t nv = 1 + index_below(rng, max_vars);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < nv; ++i) {
    const std::string n = "x" + std::to_string(i);
    const std::size_t k = 1 + index_below(rng, max_stalk);
    std::vector<double> vals;
    for (std::size_t j = 0; j < k; ++j) vals.push_back(static_cast<double>(j));
    f.domains[n] = vals;
    f.sys.add_variable(n, StalkSpace::finite_scalars(vals, n));
    names.push_back(n);
  }
  const std::size_t ne = 1 + index_below(rng, explicit_only ? nv : nv + 1);
  std::vector<std::string> targets = names;
  std::shuffle(targets.begin(), targets.end(), rng);
  for (std::size_t ei = 0; ei < ne; ++ei) {
    Equation e;
    e.id = "e" + std::to_string(ei);
    if (explicit_only) {
      const std::string target = targets[ei];
      std::vector<std::string> inputs;
      for (const auto& n : names)
        if (n != target && index_below(rng, 2) == 0) inputs.push_back(n);
      std::vector<std::vector<double>> sets;
      for (const auto& n : inputs) sets.push_back(f.domains[n]);
      Table table;
      const auto& tvals = f.domains[target];
      for (const auto& key : cartesian(sets)) table[key] = tvals[index_below(rng, tvals.size())];
      e.vars = inputs;
      e.vars.push_back(target);
      e.defines = target;
      const std::size_t m = inputs.size();
      e.solved_forms[target] = [table, m](const std::vector<StalkValue>& args) {
        std::vector<double> key;
        for (std::size_t i = 0; i < m; ++i) key.push_back(args[i][0]);
        return StalkValue{table.at(key)};
      };
      e.residual = [table, m](const std::vector<StalkValue>& args) {
        std::vector<double> key;
        for (std::size_t i = 0; i < m; ++i) key.push_back(args[i][0]);
        return args[m][0] - table.at(key);
      };
    } else {
      for (const auto& n : names)
        if (index_below(rng, 2) == 0) e.vars.push_back(n);
      if (e.vars.empty()) e.vars.push_back(names[index_below(rng, names.size())]);
      std::vector<std::vector<double>> sets;
      for (const auto& n : e.vars) sets.push_back(f.domains[n]);
      std::set<std::vector<double>> allowed;
      for (const auto& t : cartesian(sets))
        if (index_below(rng, 3) != 0) allowed.insert(t);
      e.residual = [allowed](const std::vector<StalkValue>& args) {
        std::vector<double> t;
        for (const auto& a : args) t.push_back(a[0]);
        return allowed.count(t) ? 0.0 : 1.0;
      };
    }
    f.sys.add_equation(std::move(e));
  }
  return f;
}

/// Every assignment of the variables that satisfies all equations exactly.
inline std::vector<Assignment> brute_force_solutions(const FiniteSystem& f) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> sets;
  for (const auto& v : f.sys.variables()) {
    names.push_back(v.name);
    sets.push_back(f.domains.at(v.name));
  }
  std::vector<Assignment> out;
  for (const auto& tuple : cartesian(sets)) {
    Assignment a;
    for (std::size_t i = 0; i < names.size(); ++i) a.set_scalar(names[i], tuple[i]);
    bool ok = true;
    for (const auto& e : f.sys.equations()) {
      std::vector<StalkValue> args;
      for (const auto& v : e.vars) args.push_back(a.at(v));
      if (e.residual(args) != 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Assignment> variable_parts(const EquationSystem& sys, const std::vector<Assignment>& sections) {
  std::vector<Assignment> out;
  for (const auto& s : sections) out.push_back(variable_part(sys, s));
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace testsupport

#endif // SHEAF_GOODWIN_TESTS_SUPPORT_HPP
