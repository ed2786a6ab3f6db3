#ifndef SHEAF_GOODWIN_MODELS_DYNAMICAL_MODEL_HPP
#define SHEAF_GOODWIN_MODELS_DYNAMICAL_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "../error.hpp"

namespace sheaf_goodwin {

using State = std::vector<double>;
using Matrix = Eigen::MatrixXd;

/// Type-erased autonomous ODE x' = f(x).
///
/// `rhs` writes into a caller-owned buffer so the integrator can run
/// without allocating. `project`, when set, is applied after every
/// accepted step (algebraic price reset in the trade model).
struct DynamicalModel {
  std::string name;
  std::vector<std::string> state_names;
  std::function<void(std::span<const double>, std::span<double>)> rhs;
  std::function<void(std::span<double>)> project;
  std::function<Matrix(const State&)> jacobian;
  /// Components that must stay strictly positive during integration.
  std::vector<std::size_t> positive_components;
  /// Components overwritten by `project`; perturbations skip them.
  std::vector<std::size_t> projected_components;
  std::string params_hash;

  std::size_t dimension() const noexcept { return state_names.size(); }

  State evaluate(const State& x) const {
    State dx(x.size());
    rhs(x, dx);
    return dx;
  }

  State projected(State x) const {
    if (project) project(x);
    return x;
  }
};

namespace detail {

/// FNV-1a over the bit patterns of the parameters, as 16 hex digits.
inline std::string hash_params(std::initializer_list<double> values) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : values) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace detail

/// Central-difference Jacobian with step 1e-6 relative to |x_j| (floor 1e-6).
inline Matrix numeric_jacobian(const DynamicalModel& m, const State& x) {
  const std::size_t n = x.size();
  Matrix J(n, n);
  State xp = x, xm = x, fp(n), fm(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    m.rhs(xp, fp);
    m.rhs(xm, fm);
    for (std::size_t i = 0; i < n; ++i) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (fp[i] - fm[i]) / (2 * h);
    xp[j] = xm[j] = x[j];
  }
  return J;
}

/// Analytic Jacobian when the model has one, finite differences otherwise.
inline Matrix jacobian_at(const DynamicalModel& m, const State& x) {
  return m.jacobian ? m.jacobian(x) : numeric_jacobian(m, x);
}

// ---------------------------------------------------------------------------
// Fixed points

enum class FixedPointKind { stable_node, unstable_node, saddle, center, spiral_in, spiral_out, non_hyperbolic };

inline const char* to_string(FixedPointKind k) {
  switch (k) {
    case FixedPointKind::stable_node: return "stable-node";
    case FixedPointKind::unstable_node: return "unstable-node";
    case FixedPointKind::saddle: return "saddle";
    case FixedPointKind::center: return "center";
    case FixedPointKind::spiral_in: return "spiral-in";
    case FixedPointKind::spiral_out: return "spiral-out";
    case FixedPointKind::non_hyperbolic: return "non-hyperbolic";
  }
  return "?";
}

struct Classification {
  FixedPointKind kind = FixedPointKind::non_hyperbolic;
  std::vector<std::complex<double>> eigenvalues;
  double trace = 0.0;
  double determinant = 0.0;
};

/// Linear-stability type of a Jacobian.
///
/// A 2x2 matrix with |trace| < trace_tol and positive determinant is a
/// center (conservative). Otherwise eigenvalue real parts decide; a real
/// part within trace_tol of zero makes the point non-hyperbolic.
inline Classification classify_fixed_point(const Matrix& J, double trace_tol = 1e-9) {
  Classification c;
  c.trace = J.trace();
  c.determinant = J.determinant();
  Eigen::EigenSolver<Matrix> es(J, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) c.eigenvalues.push_back(es.eigenvalues()[i]);
  std::sort(c.eigenvalues.begin(), c.eigenvalues.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  if (J.rows() == 2 && std::abs(c.trace) < trace_tol && c.determinant > 0) {
    c.kind = FixedPointKind::center;
    return c;
  }
  bool any_complex = false, any_pos = false, any_neg = false, any_zero = false;
  for (auto l : c.eigenvalues) {
    if (std::abs(l.imag()) > trace_tol) any_complex = true;
    if (l.real() > trace_tol) any_pos = true;
    else if (l.real() < -trace_tol) any_neg = true;
    else any_zero = true;
  }
  if (any_zero) c.kind = FixedPointKind::non_hyperbolic;
  else if (any_pos && any_neg) c.kind = FixedPointKind::saddle;
  else if (any_neg) c.kind = any_complex ? FixedPointKind::spiral_in : FixedPointKind::stable_node;
  else c.kind = any_complex ? FixedPointKind::spiral_out : FixedPointKind::unstable_node;
  return c;
}

struct FixedPoint {
  State state;
  FixedPointKind classification = FixedPointKind::non_hyperbolic;
  std::vector<std::complex<double>> eigenvalues;
  double residual = 0.0;  ///< max |f(x)|
  bool trivial = false;
  std::string note;
};

inline double max_abs(const State& x) {
  double m = 0.0;
  for (double c : x) m = std::max(m, std::abs(c));
  return m;
}

inline FixedPoint make_fixed_point(const DynamicalModel& m, State x, bool trivial = false, std::string note = {}) {
  FixedPoint fp;
  fp.residual = max_abs(m.evaluate(x));
  const Classification c = classify_fixed_point(jacobian_at(m, x));
  fp.classification = c.kind;
  fp.eigenvalues = c.eigenvalues;
  fp.state = std::move(x);
  fp.trivial = trivial;
  fp.note = std::move(note);
  return fp;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_MODELS_DYNAMICAL_MODEL_HPP
