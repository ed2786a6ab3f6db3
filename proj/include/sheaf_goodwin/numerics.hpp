#ifndef SHEAF_GOODWIN_NUMERICS_HPP
#define SHEAF_GOODWIN_NUMERICS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

namespace sheaf_goodwin {

/// Bisection on [lo, hi] until the bracket is narrower than `xtol`.
/// Requires a sign change; returns nullopt otherwise.
inline std::optional<double> bisect(const std::function<double(double)>& f, double lo, double hi,
                                    double xtol = 1e-12) {
  const double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi)) return std::nullopt;
  std::uintmax_t max_iter = 200;
  auto done = [xtol](double a, double b) { return std::abs(b - a) <= xtol; };
  auto [a, b] = boost::math::tools::bisect(f, lo, hi, done, max_iter);
  return 0.5 * (a + b);
}

/// Roots of f in the open interval (lo, hi), located by scanning `grid`
/// equal cells for sign changes and refining each by bisection. A root met
/// exactly on a grid node counts once.
inline std::vector<double> find_roots(const std::function<double(double)>& f, double lo, double hi,
                                      int grid = 2000, double xtol = 1e-12) {
  std::vector<double> roots;
  const double h = (hi - lo) / grid;
  // Stay off the open endpoints.
  double a = lo + 1e-3 * h;
  double fa = f(a);
  for (int i = 1; i <= grid; ++i) {
    const double b = (i == grid) ? hi - 1e-3 * h : lo + i * h;
    const double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb)) {
      a = b;
      fa = fb;
      continue;
    }
    if (fa == 0.0) {
      if (roots.empty() || std::abs(roots.back() - a) > xtol) roots.push_back(a);
    } else if (fb != 0.0 && std::signbit(fa) != std::signbit(fb)) {
      if (auto r = bisect(f, a, b, xtol)) roots.push_back(*r);
    }
    a = b;
    fa = fb;
  }
  if (fa == 0.0 && (roots.empty() || std::abs(roots.back() - a) > xtol)) roots.push_back(a);
  return roots;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_NUMERICS_HPP
