#ifndef SHEAF_GOODWIN_DYNAMICS_SWEEP_HPP
#define SHEAF_GOODWIN_DYNAMICS_SWEEP_HPP

#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "classify.hpp"

namespace sheaf_goodwin {

struct SweepRow {
  double value = 0.0;
  bool truncated = false;
  DynamicsVerdict verdict;
  std::string message;  ///< integration failure text for truncated rows
};

/// Builds the model and initial state for one grid value.
using SweepCase = std::function<std::pair<DynamicalModel, State>(double)>;

/// lo, lo + step, ... up to hi inclusive (within half a step).
inline std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0) || hi < lo) throw DomainError("grid needs step > 0 and hi >= lo");
  std::vector<double> g;
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 0.5));
  for (long long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

/// Classifies every grid point with up to `jobs` worker threads.
///
/// Workers take indices from a shared counter and write only their own row,
/// so the output does not depend on `jobs`.
inline std::vector<SweepRow> run_sweep(const std::vector<double>& grid, const SweepCase& make_case,
                                       const ClassifyOptions& opts, unsigned jobs = 1) {
  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      SweepRow& r = rows[i];
      r.value = grid[i];
      try {
        auto [model, x0] = make_case(grid[i]);
        r.verdict = classify_dynamics(model, x0, opts);
      } catch (const IntegrationError& e) {
        r.truncated = true;
        r.message = e.what();
      } catch (const DomainError& e) {
        r.truncated = true;
        r.message = e.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, grid.size()))));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_DYNAMICS_SWEEP_HPP
