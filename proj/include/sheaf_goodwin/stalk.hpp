#ifndef SHEAF_GOODWIN_STALK_HPP
#define SHEAF_GOODWIN_STALK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace sheaf_goodwin {

/// A point of a stalk. Finite-set elements, real vectors and sampled
/// trajectories are all flat coordinate vectors.
using StalkValue = std::vector<double>;
using Rng = std::mt19937_64;

inline double max_abs_diff(const StalkValue& a, const StalkValue& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

enum class StalkKind { finite_set, real_vector, real_interval };

inline const char* to_string(StalkKind k) {
  switch (k) {
    case StalkKind::finite_set: return "finite-set";
    case StalkKind::real_vector: return "real-vector";
    case StalkKind::real_interval: return "real-interval";
  }
  return "?";
}

/// The value space attached to a poset element.
///
/// Real kinds carry a sampling box used by randomized checks; an optional
/// membership predicate carves out a subset (for instance the zero set of
/// an equation residual).
class StalkSpace {
public:
  using Predicate = std::function<bool(const StalkValue&)>;
  using Sampler = std::function<StalkValue(Rng&)>;

  static StalkSpace finite_set(std::vector<StalkValue> values, std::string label = {}) {
    if (values.empty()) throw StructuralError("finite stalk must be nonempty");
    StalkSpace s;
    s.kind_ = StalkKind::finite_set;
    s.dimension_ = values.front().size();
    s.values_ = std::make_shared<const std::vector<StalkValue>>(std::move(values));
    s.label_ = std::move(label);
    return s;
  }

  /// Convenience for scalar finite sets such as {0, 1, 2}.
  static StalkSpace finite_scalars(const std::vector<double>& values, std::string label = {}) {
    std::vector<StalkValue> v;
    v.reserve(values.size());
    for (double x : values) v.push_back({x});
    return finite_set(std::move(v), std::move(label));
  }

  static StalkSpace real_vector(std::size_t dimension, double sample_lo = -1.0, double sample_hi = 1.0,
                                std::string label = {}) {
    if (dimension == 0) throw StructuralError("real-vector stalk needs dimension >= 1");
    StalkSpace s;
    s.kind_ = StalkKind::real_vector;
    s.dimension_ = dimension;
    s.lo_ = sample_lo;
    s.hi_ = sample_hi;
    s.label_ = std::move(label);
    return s;
  }

  static StalkSpace real_interval(double lo, double hi, std::string label = {}) {
    if (!(lo < hi)) throw StructuralError("real-interval stalk needs lo < hi");
    StalkSpace s;
    s.kind_ = StalkKind::real_interval;
    s.dimension_ = 1;
    s.lo_ = lo;
    s.hi_ = hi;
    s.label_ = std::move(label);
    return s;
  }

  /// Cartesian product, concatenating coordinates in factor order.
  static StalkSpace product(const std::vector<StalkSpace>& factors, std::string label = {}) {
    if (factors.empty()) throw StructuralError("empty stalk product");
    const bool all_finite = std::all_of(factors.begin(), factors.end(),
                                        [](const StalkSpace& f) { return f.is_finite(); });
    if (all_finite) {
      std::vector<StalkValue> tuples{StalkValue{}};
      for (const auto& f : factors) {
        std::vector<StalkValue> next;
        next.reserve(tuples.size() * f.values().size());
        for (const auto& t : tuples)
          for (const auto& v : f.values()) {
            StalkValue w = t;
            w.insert(w.end(), v.begin(), v.end());
            next.push_back(std::move(w));
          }
        tuples = std::move(next);
      }
      return finite_set(std::move(tuples), std::move(label));
    }
    std::size_t dim = 0;
    for (const auto& f : factors) dim += f.dimension();
    StalkSpace s = real_vector(dim, -1.0, 1.0, std::move(label));
    auto parts = std::make_shared<const std::vector<StalkSpace>>(factors);
    s.sampler_ = [parts](Rng& rng) {
      StalkValue out;
      for (const auto& f : *parts) {
        StalkValue v = f.sample(rng);
        out.insert(out.end(), v.begin(), v.end());
      }
      return out;
    };
    s.membership_ = [parts](const StalkValue& x) {
      std::size_t off = 0;
      for (const auto& f : *parts) {
        StalkValue piece(x.begin() + static_cast<std::ptrdiff_t>(off),
                         x.begin() + static_cast<std::ptrdiff_t>(off + f.dimension()));
        if (!f.contains(piece)) return false;
        off += f.dimension();
      }
      return true;
    };
    return s;
  }

  /// Subset defined by a predicate. On finite kinds the values are filtered
  /// (the result may be empty, which `is_empty()` reports).
  StalkSpace restricted(const Predicate& keep, std::string label = {}) const {
    StalkSpace s = *this;
    if (!label.empty()) s.label_ = std::move(label);
    if (is_finite()) {
      std::vector<StalkValue> kept;
      for (const auto& v : values())
        if (keep(v)) kept.push_back(v);
      s.values_ = std::make_shared<const std::vector<StalkValue>>(std::move(kept));
      return s;
    }
    auto prev = membership_;
    s.membership_ = [prev, keep](const StalkValue& x) { return (!prev || prev(x)) && keep(x); };
    return s;
  }

  StalkSpace with_sampler(Sampler sampler) const {
    StalkSpace s = *this;
    s.sampler_ = std::move(sampler);
    return s;
  }

  StalkKind kind() const noexcept { return kind_; }
  bool is_finite() const noexcept { return kind_ == StalkKind::finite_set; }
  bool is_empty() const noexcept { return is_finite() && values_->empty(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& label() const noexcept { return label_; }
  bool has_membership_predicate() const noexcept { return static_cast<bool>(membership_); }

  const std::vector<StalkValue>& values() const {
    if (!is_finite()) throw UnsupportedError("stalk is not a finite set");
    return *values_;
  }

  bool contains(const StalkValue& x, double tol = 0.0) const {
    if (x.size() != dimension_) return false;
    switch (kind_) {
      case StalkKind::finite_set:
        return std::any_of(values_->begin(), values_->end(),
                           [&](const StalkValue& v) { return max_abs_diff(v, x) <= tol; });
      case StalkKind::real_interval:
        if (!(x[0] >= lo_ - tol && x[0] <= hi_ + tol)) return false;
        break;
      case StalkKind::real_vector:
        if (!std::all_of(x.begin(), x.end(), [](double c) { return std::isfinite(c); })) return false;
        break;
    }
    return !membership_ || membership_(x);
  }

  /// Pseudo-random point. Finite kinds pick uniformly among values; real
  /// kinds use the custom sampler when set, else the sampling box.
  StalkValue sample(Rng& rng) const {
    if (is_finite()) {
      if (values_->empty()) throw StructuralError("cannot sample an empty stalk");
      std::uniform_int_distribution<std::size_t> pick(0, values_->size() - 1);
      return (*values_)[pick(rng)];
    }
    if (sampler_) return sampler_(rng);
    std::uniform_real_distribution<double> u(lo_, hi_);
    StalkValue x(dimension_);
    for (auto& c : x) c = u(rng);
    return x;
  }

  /// Short description used in DOT labels.
  std::string describe() const {
    if (!label_.empty()) return label_;
    switch (kind_) {
      case StalkKind::finite_set: return "finite(" + std::to_string(values_->size()) + ")";
      case StalkKind::real_vector: return "R^" + std::to_string(dimension_);
      case StalkKind::real_interval: return "interval";
    }
    return "?";
  }

private:
  StalkKind kind_ = StalkKind::real_vector;
  std::size_t dimension_ = 1;
  double lo_ = -1.0;
  double hi_ = 1.0;
  std::shared_ptr<const std::vector<StalkValue>> values_;
  Predicate membership_;
  Sampler sampler_;
  std::string label_;
};

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_STALK_HPP
