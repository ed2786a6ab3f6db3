#ifndef SHEAF_GOODWIN_DYNAMICS_AREA_HPP
#define SHEAF_GOODWIN_DYNAMICS_AREA_HPP

#include <array>
#include <cmath>
#include <vector>

#include "integrate.hpp"

namespace sheaf_goodwin {

/// Unsigned area of the triangle spanned by the first two components.
inline double triangle_area(const State& a, const State& b, const State& c) {
  return 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

/// Area of the image of a triangle of initial conditions at `checkpoints`
/// evenly spaced times in (0, t_end], preceded by the initial area.
///
/// Only the vertices are transported, so the triangle must be small for the
/// result to track the true image area.
inline std::vector<double> triangle_area_history(const DynamicalModel& m, std::array<State, 3> tri, double t_end,
                                                 double dt, std::size_t checkpoints) {
  if (checkpoints == 0) throw DomainError("need at least one checkpoint");
  if (m.dimension() < 2) throw DomainError("area needs a model with at least two components");
  std::vector<double> out{triangle_area(tri[0], tri[1], tri[2])};
  const double h = t_end / static_cast<double>(checkpoints);
  for (std::size_t k = 0; k < checkpoints; ++k) {
    for (auto& x : tri) x = integrate_to(m, x, h, dt);
    out.push_back(triangle_area(tri[0], tri[1], tri[2]));
  }
  return out;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_DYNAMICS_AREA_HPP
