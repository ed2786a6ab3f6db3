#ifndef SHEAF_GOODWIN_DYNAMICS_TRAJECTORY_SHEAF_HPP
#define SHEAF_GOODWIN_DYNAMICS_TRAJECTORY_SHEAF_HPP

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "../equation_system.hpp"
#include "integrate.hpp"

namespace sheaf_goodwin {

struct TrajectorySheafOptions {
  std::size_t points = 64;
  double dt = 1e-3;
  /// Allowed gap between d/dt of a state series and its derivative series.
  double fd_tol = 1e-5;
};

/// Draws an initial state for one solution segment.
using InitialSampler = std::function<State(Rng&)>;

/// Trajectory-mode solution sheaf whose equation stalks hold actual
/// solution segments of `model`.
///
/// The lifted product/solution sheaf samples each series independently, so
/// d/dt of a sampled state has nothing to do with the sampled derivative and
/// the diagram does not commute. Here an equation stalk additionally
/// requires d/dt(state) to match the derivative series to `fd_tol`, and its
/// sampler integrates the model with RK4 from `initial` and fills each
/// derivative variable with the RHS along the segment. Variables are matched
/// to model components by name.
inline Sheaf build_trajectory_sheaf(const EquationSystem& pointwise, const DynamicalModel& model,
                                    const InitialSampler& initial, TrajectorySheafOptions opts = {}) {
  const EquationSystem sys = lift_to_trajectories(pointwise, opts.points);
  Sheaf sh = build_solution_sheaf(sys, nullptr, TrajectoryGrid{opts.dt});

  std::map<std::string, std::size_t> component;
  for (std::size_t i = 0; i < model.state_names.size(); ++i) component[model.state_names[i]] = i;
  std::map<std::string, std::size_t> derivative_of;  // derivative variable -> component
  for (const auto& l : sys.derivative_links()) {
    auto it = component.find(l.state);
    if (it == component.end()) throw StructuralError("state '" + l.state + "' is not a component of " + model.name);
    derivative_of[l.derivative] = it->second;
  }

  const std::size_t n = opts.points;
  const double dt = opts.dt;
  for (const auto& e : sys.equations()) {
    std::vector<std::pair<std::size_t, std::size_t>> fd_pairs;  // (state slot, derivative slot)
    for (std::size_t a = 0; a < e.vars.size(); ++a)
      for (std::size_t b = 0; b < e.vars.size(); ++b)
        for (const auto& l : sys.derivative_links())
          if (l.state == e.vars[a] && l.derivative == e.vars[b]) fd_pairs.emplace_back(a, b);
    for (const auto& v : e.vars)
      if (!component.count(v) && !derivative_of.count(v))
        throw StructuralError("variable '" + v + "' is neither a state nor a derivative of " + model.name);

    auto consistent = [fd_pairs, n, dt, tol = opts.fd_tol](const StalkValue& t) {
      for (const auto& [a, b] : fd_pairs) {
        const StalkValue x(t.begin() + static_cast<std::ptrdiff_t>(a * n),
                           t.begin() + static_cast<std::ptrdiff_t>((a + 1) * n));
        const StalkValue d = detail::finite_difference(x, dt);
        for (std::size_t k = 0; k < n; ++k)
          if (!(std::abs(d[k] - t[b * n + k]) <= tol)) return false;
      }
      return true;
    };
    const auto vars = e.vars;
    auto sampler = [model, initial, vars, component, derivative_of, n, dt](Rng& rng) {
      const State x0 = initial(rng);
      const Trajectory tr = integrate(model, x0, static_cast<double>(n - 1) * dt, dt);
      std::vector<State> rates(n);
      for (std::size_t k = 0; k < n; ++k) rates[k] = model.evaluate(tr.states[k]);
      StalkValue tuple;
      tuple.reserve(vars.size() * n);
      for (const auto& v : vars) {
        auto c = component.find(v);
        const bool is_state = c != component.end();
        const std::size_t i = is_state ? c->second : derivative_of.at(v);
        for (std::size_t k = 0; k < n; ++k) tuple.push_back(is_state ? tr.states[k][i] : rates[k][i]);
      }
      return tuple;
    };
    sh.set_stalk(e.id, sh.stalk(e.id).restricted(consistent, "S_traj(" + e.id + ")").with_sampler(sampler));
  }
  return sh;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_DYNAMICS_TRAJECTORY_SHEAF_HPP
