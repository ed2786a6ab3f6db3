#ifndef SHEAF_GOODWIN_POSET_HPP
#define SHEAF_GOODWIN_POSET_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"

namespace sheaf_goodwin {

/// Ordered pair (lesser, greater) of element ids.
using Relation = std::pair<std::string, std::string>;

/// Finite partially ordered set over string ids.
///
/// Built from a list of generating relations; the stored order is their
/// reflexive-transitive closure. Construction fails if the closure is not
/// antisymmetric (a cycle through distinct elements). Immutable afterwards.
class Poset {
public:
  Poset() = default;

  Poset(std::vector<std::string> elements, const std::vector<Relation>& relations)
      : ids_(std::move(elements)) {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], i).second) {
        throw StructuralError("duplicate poset element '" + ids_[i] + "'");
      }
    }
    const std::size_t n = ids_.size();
    leq_.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) leq_[i * n + i] = 1;
    for (const auto& [lo, hi] : relations) {
      const std::size_t a = index_of(lo);
      const std::size_t b = index_of(hi);
      if (a == b) continue;
      if (std::find(generators_.begin(), generators_.end(), std::pair{a, b}) == generators_.end()) {
        generators_.emplace_back(a, b);
      }
      leq_[a * n + b] = 1;
    }
    // Warshall closure.
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (leq_[i * n + k])
          for (std::size_t j = 0; j < n; ++j)
            if (leq_[k * n + j]) leq_[i * n + j] = 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (leq_[i * n + j] && leq_[j * n + i]) {
          throw StructuralError("relations are not antisymmetric: '" + ids_[i] + "' and '" +
                                ids_[j] + "' lie on a cycle");
        }
    upper_covers_.assign(n, {});
    lower_covers_.assign(n, {});
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q)
        if (p != q && leq(p, q) && !has_intermediate(p, q)) {
          covers_.emplace_back(p, q);
          upper_covers_[p].push_back(q);
          lower_covers_[q].push_back(p);
        }
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& elements() const noexcept { return ids_; }
  const std::string& id(std::size_t i) const { return ids_.at(i); }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw StructuralError("unknown poset element '" + id + "'");
    return it->second;
  }

  bool leq(std::size_t a, std::size_t b) const { return leq_[a * ids_.size() + b] != 0; }
  bool leq(const std::string& a, const std::string& b) const { return leq(index_of(a), index_of(b)); }

  /// Alexandroff basic open U_x = {y : x <= y}, in element order.
  std::vector<std::string> up_set(const std::string& x) const {
    const std::size_t i = index_of(x);
    std::vector<std::string> out;
    for (std::size_t j = 0; j < size(); ++j)
      if (leq(i, j)) out.push_back(ids_[j]);
    return out;
  }

  /// Relations as they were supplied (reflexive pairs dropped, duplicates merged).
  const std::vector<std::pair<std::size_t, std::size_t>>& generating_relations() const noexcept {
    return generators_;
  }
  /// Pairs p < q with nothing strictly between.
  const std::vector<std::pair<std::size_t, std::size_t>>& covering_relations() const noexcept {
    return covers_;
  }
  const std::vector<std::size_t>& upper_covers(std::size_t i) const { return upper_covers_.at(i); }
  const std::vector<std::size_t>& lower_covers(std::size_t i) const { return lower_covers_.at(i); }

  bool is_cover(std::size_t p, std::size_t q) const {
    const auto& up = upper_covers_.at(p);
    return std::find(up.begin(), up.end(), q) != up.end();
  }

  /// A linear extension: every element appears after all elements below it.
  std::vector<std::size_t> linear_extension() const {
    const std::size_t n = size();
    std::vector<std::size_t> below(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && leq(j, i)) ++below[i];
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return below[a] < below[b]; });
    return order;
  }

  /// Reflexive, antisymmetric and transitive on the stored relation.
  bool satisfies_axioms() const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!leq(i, i)) return false;
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && leq(i, j) && leq(j, i)) return false;
        if (!leq(i, j)) continue;
        for (std::size_t k = 0; k < n; ++k)
          if (leq(j, k) && !leq(i, k)) return false;
      }
    }
    return true;
  }

private:
  bool has_intermediate(std::size_t p, std::size_t q) const {
    for (std::size_t r = 0; r < size(); ++r)
      if (r != p && r != q && leq(p, r) && leq(r, q)) return true;
    return false;
  }

  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<unsigned char> leq_;
  std::vector<std::pair<std::size_t, std::size_t>> generators_;
  std::vector<std::pair<std::size_t, std::size_t>> covers_;
  std::vector<std::vector<std::size_t>> upper_covers_;
  std::vector<std::vector<std::size_t>> lower_covers_;
};

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_POSET_HPP
