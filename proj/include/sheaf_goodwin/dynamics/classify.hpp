#ifndef SHEAF_GOODWIN_DYNAMICS_CLASSIFY_HPP
#define SHEAF_GOODWIN_DYNAMICS_CLASSIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "integrate.hpp"

namespace sheaf_goodwin {

inline constexpr double kChaosThreshold = 1e-2;
inline constexpr double kZeroBand = 5e-3;

struct LyapunovOptions {
  double horizon = 5000.0;
  double renorm_interval = 1.0;
  double d0 = 1e-8;
  double dt = 1e-3;
  std::uint64_t seed = 0;
};

namespace detail {

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Unit vector on the components the model does not project.
inline std::vector<double> perturbation_direction(const DynamicalModel& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> d(m.dimension(), 0.0);
  double norm = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::find(m.projected_components.begin(), m.projected_components.end(), i) != m.projected_components.end())
      continue;
    d[i] = n01(rng);
    norm += d[i] * d[i];
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) throw DomainError("model has no free component to perturb");
  for (double& c : d) c /= norm;
  return d;
}

/// Two-trajectory estimator; optionally records the reference orbit.
inline double lyapunov_run(const DynamicalModel& m, const State& x0, const LyapunovOptions& o, Trajectory* record,
                           double record_from, std::size_t stride) {
  if (!(o.horizon > o.renorm_interval) || !(o.renorm_interval >= o.dt)) {
    throw DomainError("need horizon > renorm_interval >= dt");
  }
  if (!(o.d0 > 0)) throw DomainError("d0 must be positive");
  std::vector<double> x = x0;
  if (m.project) m.project(x);
  const auto dir = perturbation_direction(m, o.seed);
  std::vector<double> y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += o.d0 * dir[i];
  if (m.project) m.project(y);

  Rk4Stepper sx(m), sy(m);
  const auto steps = static_cast<std::size_t>(std::llround(o.horizon / o.dt));
  const auto every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(o.renorm_interval / o.dt)));
  if (record) {
    record->model = m.name;
    record->params_hash = m.params_hash;
    record->dt = o.dt;
    record->stride = stride;
    if (record_from <= 0.0) {
      record->t.push_back(0.0);
      record->states.push_back(x);
    }
  }
  double sum = 0.0;
  std::size_t events = 0;
  for (std::size_t k = 1; k <= steps; ++k) {
    sx.step(x, o.dt);
    sy.step(y, o.dt);
    if (auto why = sx.check(x); !why.empty()) throw IntegrationError(why, k - 1);
    if (auto why = sy.check(y); !why.empty()) throw IntegrationError("perturbed orbit: " + why, k - 1);
    const double t = static_cast<double>(k) * o.dt;
    if (record && k % stride == 0 && t >= record_from) {
      record->t.push_back(t);
      record->states.push_back(x);
    }
    if (k % every == 0) {
      const double d = std::max(distance(x, y), 1e-300);
      sum += std::log(d / o.d0);
      ++events;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + (y[i] - x[i]) * (o.d0 / d);
      if (m.project) m.project(y);
    }
  }
  if (events == 0) throw DomainError("no renormalization events");
  return sum / (static_cast<double>(events) * static_cast<double>(every) * o.dt);
}

} // namespace detail

/// Largest Lyapunov exponent by renormalized separation of two orbits.
inline double lyapunov_exponent(const DynamicalModel& m, const State& x0, const LyapunovOptions& o = {}) {
  return detail::lyapunov_run(m, x0, o, nullptr, 0.0, 1);
}

// ---------------------------------------------------------------------------
// Poincare-section cycle detection

struct CycleOptions {
  double transient_fraction = 0.5;
  double tol_cycle = 1e-4;        ///< successive return points, state units
  double period_rel_tol = 1e-3;   ///< spread of return times over their mean
};

struct CycleReport {
  bool determined = false;  ///< false with fewer than 3 crossings
  bool is_cycle = false;
  std::optional<double> period;
  std::size_t crossings = 0;
  double return_spread = 0.0;   ///< max distance between successive returns
  double period_spread = 0.0;   ///< (max - min) / mean of return times
  double return_offset = 0.0;   ///< distance of the last return from the mean state
  double amplitude = 0.0;       ///< max over components of (max - min)
  std::string reason;
};

/// Returns through the hyperplane that passes through the mean state with
/// normal along the first principal axis, crossing from below.
inline CycleReport detect_limit_cycle(const Trajectory& tr, const CycleOptions& o = {}) {
  CycleReport r;
  const std::size_t n = tr.size();
  const auto first = static_cast<std::size_t>(std::floor(o.transient_fraction * static_cast<double>(n)));
  if (n < first + 3) {
    r.reason = "too few samples after the transient";
    return r;
  }
  const std::size_t dim = tr.dimension();
  const auto m = static_cast<Eigen::Index>(n - first);
  Eigen::MatrixXd X(m, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m; ++i)
    for (std::size_t j = 0; j < dim; ++j) X(i, static_cast<Eigen::Index>(j)) = tr.states[first + static_cast<std::size_t>(i)][j];
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd C = X.rowwise() - mean;
  r.amplitude = (X.colwise().maxCoeff() - X.colwise().minCoeff()).maxCoeff();
  const Eigen::MatrixXd cov = (C.transpose() * C) / static_cast<double>(std::max<Eigen::Index>(1, m - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd normal = es.eigenvectors().col(static_cast<Eigen::Index>(dim) - 1);
  // Fix the sign so the section orientation does not depend on the solver.
  Eigen::Index big = 0;
  normal.cwiseAbs().maxCoeff(&big);
  if (normal(big) < 0) normal = -normal;

  const Eigen::VectorXd s = C * normal;
  std::vector<Eigen::VectorXd> points;
  std::vector<double> times;
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    if (s(i) < 0 && s(i + 1) >= 0) {
      const double f = -s(i) / (s(i + 1) - s(i));
      points.push_back(X.row(i).transpose() + f * (X.row(i + 1) - X.row(i)).transpose());
      const double t0 = tr.t[first + static_cast<std::size_t>(i)], t1 = tr.t[first + static_cast<std::size_t>(i) + 1];
      times.push_back(t0 + f * (t1 - t0));
    }
  }
  r.crossings = points.size();
  if (points.size() < 3) {
    r.reason = "fewer than 3 section crossings";
    return r;
  }
  r.determined = true;
  const std::size_t half = points.size() / 2;
  for (std::size_t j = half; j + 1 < points.size(); ++j)
    r.return_spread = std::max(r.return_spread, (points[j + 1] - points[j]).norm());
  std::vector<double> gaps;
  for (std::size_t j = 0; j + 1 < times.size(); ++j) gaps.push_back(times[j + 1] - times[j]);
  double mean_gap = 0.0;
  for (double g : gaps) mean_gap += g;
  mean_gap /= static_cast<double>(gaps.size());
  const auto [lo, hi] = std::minmax_element(gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  r.period_spread = (*hi - *lo) / mean_gap;
  r.return_offset = (points.back() - mean.transpose()).norm();
  const bool returns_converge = r.return_spread < o.tol_cycle;
  const bool times_settle = r.period_spread < o.period_rel_tol;
  const bool off_centre = r.return_offset > o.tol_cycle;
  r.is_cycle = returns_converge && times_settle && off_centre;
  if (r.is_cycle) r.period = mean_gap;
  else if (!off_centre) r.reason = "returns collapse onto the mean state";
  else if (!returns_converge) r.reason = "return map does not converge";
  else r.reason = "return times do not settle";
  return r;
}

// ---------------------------------------------------------------------------
// Verdicts

enum class DynamicsKind { fixed_point, limit_cycle, chaotic, undetermined };

inline const char* to_string(DynamicsKind k) {
  switch (k) {
    case DynamicsKind::fixed_point: return "fixed-point";
    case DynamicsKind::limit_cycle: return "limit-cycle";
    case DynamicsKind::chaotic: return "chaotic";
    case DynamicsKind::undetermined: return "undetermined";
  }
  return "?";
}

struct ClassifyOptions {
  LyapunovOptions lyapunov;
  CycleOptions cycle;
  std::size_t record_stride = 10;    ///< integration steps between stored samples
  double fixed_point_tol = 1e-6;     ///< post-transient amplitude below this is a fixed point
  double chaos_threshold = kChaosThreshold;
  double zero_band = kZeroBand;
};

struct DynamicsEvidence {
  double amplitude = 0.0;
  std::size_t crossings = 0;
  double return_spread = 0.0;
  double period_spread = 0.0;
  double mean_divergence = 0.0;  ///< time-averaged Jacobian trace after the transient
  bool neutral = false;          ///< both the exponent and mean divergence are near 0
  std::string note;
};

struct DynamicsVerdict {
  DynamicsKind kind = DynamicsKind::undetermined;
  double lyapunov = 0.0;
  std::optional<double> period;
  DynamicsEvidence evidence;
};

/// Amplitude first (fixed point), then the exponent (chaotic), then the
/// cycle detector (limit cycle); anything else is undetermined.
inline DynamicsVerdict classify_dynamics(const DynamicalModel& m, const State& x0, const ClassifyOptions& o = {}) {
  Trajectory rec;
  const double from = o.cycle.transient_fraction * o.lyapunov.horizon;
  DynamicsVerdict v;
  v.lyapunov = detail::lyapunov_run(m, x0, o.lyapunov, &rec, from, std::max<std::size_t>(1, o.record_stride));
  CycleOptions co = o.cycle;
  co.transient_fraction = 0.0;  // the recording already starts after the transient
  const CycleReport cyc = detect_limit_cycle(rec, co);

  auto& ev = v.evidence;
  ev.amplitude = cyc.amplitude;
  ev.crossings = cyc.crossings;
  ev.return_spread = cyc.return_spread;
  ev.period_spread = cyc.period_spread;
  if (!rec.states.empty()) {
    const std::size_t step = std::max<std::size_t>(1, rec.states.size() / 2000);
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < rec.states.size(); i += step, ++cnt) sum += jacobian_at(m, rec.states[i]).trace();
    ev.mean_divergence = sum / static_cast<double>(cnt);
  }
  ev.neutral = std::abs(v.lyapunov) < o.zero_band && std::abs(ev.mean_divergence) < o.zero_band;

  if (cyc.amplitude < o.fixed_point_tol) {
    v.kind = DynamicsKind::fixed_point;
    ev.note = "post-transient amplitude below tolerance";
  } else if (v.lyapunov > o.chaos_threshold) {
    v.kind = DynamicsKind::chaotic;
    ev.note = "exponent above chaos threshold";
  } else if (cyc.is_cycle) {
    v.kind = DynamicsKind::limit_cycle;
    v.period = cyc.period;
    ev.note = ev.neutral ? "neutrally-stable closed orbit (conservative), not attracting" : "attracting cycle";
  } else {
    v.kind = DynamicsKind::undetermined;
    ev.note = cyc.reason;
  }
  return v;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_DYNAMICS_CLASSIFY_HPP
