#ifndef SHEAF_GOODWIN_DYNAMICS_INTEGRATE_HPP
#define SHEAF_GOODWIN_DYNAMICS_INTEGRATE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "../models/dynamical_model.hpp"

namespace sheaf_goodwin {

/// Any |component| above this aborts integration.
inline constexpr double kBlowUpBound = 1e12;

struct Trajectory {
  std::vector<double> t;
  std::vector<State> states;
  std::string model;
  std::string params_hash;
  double dt = 0.0;  ///< integration step
  std::size_t stride = 1;  ///< integration steps between stored rows

  std::size_t size() const noexcept { return t.size(); }
  std::size_t dimension() const noexcept { return states.empty() ? 0 : states.front().size(); }
};

struct IntegrateOptions {
  /// Store every `stride`-th step (the final step is always stored).
  std::size_t stride = 1;
  /// Rows strictly before this time are not stored (the initial row is).
  double record_from = 0.0;
};

/// Classical RK4 with allocation-free stepping.
class Rk4Stepper {
public:
  explicit Rk4Stepper(const DynamicalModel& m) : m_(m), n_(m.dimension()), k1_(n_), k2_(n_), k3_(n_), k4_(n_), tmp_(n_) {}

  /// Advances x by one step, then applies the model's projection.
  void step(std::vector<double>& x, double dt) {
    m_.rhs(x, k1_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + 0.5 * dt * k1_[i];
    m_.rhs(tmp_, k2_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + 0.5 * dt * k2_[i];
    m_.rhs(tmp_, k3_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + dt * k3_[i];
    m_.rhs(tmp_, k4_);
    for (std::size_t i = 0; i < n_; ++i) x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    if (m_.project) m_.project(x);
  }

  /// Empty when x is acceptable, else a description of the problem.
  std::string check(const std::vector<double>& x) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (!std::isfinite(x[i])) return "non-finite " + m_.state_names[i];
      if (std::abs(x[i]) > kBlowUpBound) return "blow-up: |" + m_.state_names[i] + "| > 1e12";
    }
    for (std::size_t i : m_.positive_components)
      if (!(x[i] > 0)) return "step rejected: " + m_.state_names[i] + " <= 0";
    return {};
  }

private:
  const DynamicalModel& m_;
  std::size_t n_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Fixed-step integration from x0 up to t_end.
///
/// Models with a projection have it applied to x0 as well, so every stored
/// row satisfies the algebraic constraint. Throws IntegrationError (with
/// the index of the last valid step) on blow-up, non-finite values, or a
/// positive component reaching zero.
inline Trajectory integrate(const DynamicalModel& m, const State& x0, double t_end, double dt,
                            IntegrateOptions opts = {}) {
  if (!(dt > 0)) throw DomainError("dt must be positive");
  if (!(t_end > 0)) throw DomainError("t_end must be positive");
  if (x0.size() != m.dimension()) throw DomainError("initial state has wrong dimension");
  if (opts.stride == 0) opts.stride = 1;
  Trajectory tr;
  tr.model = m.name;
  tr.params_hash = m.params_hash;
  tr.dt = dt;
  tr.stride = opts.stride;

  std::vector<double> x = x0;
  if (m.project) m.project(x);
  Rk4Stepper stepper(m);
  if (auto why = stepper.check(x); !why.empty()) throw IntegrationError("initial state invalid: " + why, 0);
  {
    State dx = m.evaluate(x);
    for (double c : dx)
      if (!std::isfinite(c)) throw IntegrationError("right-hand side not finite at the initial state", 0);
  }
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  tr.t.push_back(0.0);
  tr.states.push_back(x);
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(x, dt);
    if (auto why = stepper.check(x); !why.empty()) {
      throw IntegrationError(why + " at t = " + std::to_string(static_cast<double>(k) * dt), k - 1);
    }
    const double t = static_cast<double>(k) * dt;
    if ((k % opts.stride == 0 || k == steps) && t >= opts.record_from) {
      tr.t.push_back(t);
      tr.states.push_back(x);
    }
  }
  return tr;
}

/// Endpoint only, without storing intermediate rows.
inline State integrate_to(const DynamicalModel& m, const State& x0, double t_end, double dt) {
  State x = x0;
  if (m.project) m.project(x);
  Rk4Stepper stepper(m);
  const auto steps = static_cast<std::size_t>(std::llround(std::abs(t_end) / dt));
  const double h = t_end < 0 ? -dt : dt;
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(x, h);
    if (auto why = stepper.check(x); !why.empty()) throw IntegrationError(why, k - 1);
  }
  return x;
}

struct ConservationReport {
  double max_drift = 0.0;
  double relative_drift = 0.0;  ///< max_drift / |F(x0)|, or max_drift when F(x0) = 0
};

inline ConservationReport conservation_report(const Trajectory& tr, const std::function<double(const State&)>& F) {
  ConservationReport r;
  if (tr.states.empty()) return r;
  const double f0 = F(tr.states.front());
  for (const auto& x : tr.states) r.max_drift = std::max(r.max_drift, std::abs(F(x) - f0));
  r.relative_drift = f0 != 0.0 ? r.max_drift / std::abs(f0) : r.max_drift;
  return r;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_DYNAMICS_INTEGRATE_HPP
