#pragma once

// Finite subsets of Z^nu with the l1 metric.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lppl/errors.hpp"

namespace lppl {

using Coord = std::int64_t;
using Distance = std::int64_t;

/// Marker returned by set distances when one of the sets is empty.
inline constexpr Distance kInfiniteDistance = std::numeric_limits<Distance>::max();

constexpr bool is_infinite(Distance d) noexcept { return d == kInfiniteDistance; }

/// Lattice point of Z^nu.
struct Site {
  std::vector<Coord> coords;

  Site() = default;
  explicit Site(std::vector<Coord> c) : coords(std::move(c)) {}
  Site(std::initializer_list<Coord> c) : coords(c) {}

  std::size_t dimension() const noexcept { return coords.size(); }

  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;
};

inline std::string to_string(const Site& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.coords.size(); ++i) {
    if (i) os << ',';
    os << s.coords[i];
  }
  os << ')';
  return os.str();
}

inline Distance l1_distance(const Site& a, const Site& b) {
  if (a.dimension() != b.dimension())
    throw DimensionError("l1_distance: sites " + to_string(a) + " and " + to_string(b) +
                         " live in different lattices");
  Distance d = 0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) d += std::llabs(a.coords[i] - b.coords[i]);
  return d;
}

/// Inclusive coordinate range used by box shorthands.
struct CoordRange {
  Coord lo = 0;
  Coord hi = 0;
};

/// Finite, lexicographically ordered set of sites. The order is the canonical
/// tensor-factor order used by every Hilbert-space layout built on top of it.
class SiteSet {
public:
  explicit SiteSet(std::size_t dim = 1) : dim_(dim) {
    if (dim_ == 0) throw DimensionError("SiteSet: lattice dimension must be at least 1");
  }

  /// Throws GeometryError on duplicates, DimensionError on mixed dimensions.
  static SiteSet from_sites(std::size_t dim, std::vector<Site> sites) {
    SiteSet s(dim);
    for (const auto& x : sites)
      if (x.dimension() != dim)
        throw DimensionError("SiteSet: site " + to_string(x) + " has dimension " +
                             std::to_string(x.dimension()) + ", expected " + std::to_string(dim));
    std::sort(sites.begin(), sites.end());
    auto dup = std::adjacent_find(sites.begin(), sites.end());
    if (dup != sites.end()) throw GeometryError("SiteSet: duplicate site " + to_string(*dup));
    s.sites_ = std::move(sites);
    return s;
  }

  /// Cartesian product of inclusive ranges, one per lattice direction.
  static SiteSet box(const std::vector<CoordRange>& ranges) {
    if (ranges.empty()) throw DimensionError("SiteSet::box: need at least one range");
    std::vector<Site> sites;
    std::vector<Coord> cur(ranges.size());
    for (const auto& r : ranges)
      if (r.hi < r.lo) return SiteSet(ranges.size());
    std::function<void(std::size_t)> rec = [&](std::size_t axis) {
      if (axis == ranges.size()) {
        sites.emplace_back(cur);
        return;
      }
      for (Coord c = ranges[axis].lo; c <= ranges[axis].hi; ++c) {
        cur[axis] = c;
        rec(axis + 1);
      }
    };
    rec(0);
    return from_sites(ranges.size(), std::move(sites));
  }

  /// Chain {lo, ..., hi} in one dimension.
  static SiteSet interval(Coord lo, Coord hi) { return box({CoordRange{lo, hi}}); }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return sites_.size(); }
  bool empty() const noexcept { return sites_.empty(); }
  const Site& operator[](std::size_t i) const { return sites_[i]; }
  const std::vector<Site>& sites() const noexcept { return sites_; }
  auto begin() const noexcept { return sites_.begin(); }
  auto end() const noexcept { return sites_.end(); }

  bool contains(const Site& x) const { return std::binary_search(sites_.begin(), sites_.end(), x); }

  /// Position of x in canonical order, or size() if absent.
  std::size_t index_of(const Site& x) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), x);
    if (it == sites_.end() || *it != x) return sites_.size();
    return static_cast<std::size_t>(it - sites_.begin());
  }

  bool is_subset_of(const SiteSet& other) const {
    check_same_dimension(other);
    return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(), sites_.end());
  }

  bool intersects(const SiteSet& other) const {
    check_same_dimension(other);
    auto a = sites_.begin();
    auto b = other.sites_.begin();
    while (a != sites_.end() && b != other.sites_.end()) {
      if (*a < *b) ++a;
      else if (*b < *a) ++b;
      else return true;
    }
    return false;
  }

  SiteSet set_union(const SiteSet& other) const {
    return combine(other, [](auto a0, auto a1, auto b0, auto b1, auto out) {
      return std::set_union(a0, a1, b0, b1, out);
    });
  }
  SiteSet set_difference(const SiteSet& other) const {
    return combine(other, [](auto a0, auto a1, auto b0, auto b1, auto out) {
      return std::set_difference(a0, a1, b0, b1, out);
    });
  }
  SiteSet set_intersection(const SiteSet& other) const {
    return combine(other, [](auto a0, auto a1, auto b0, auto b1, auto out) {
      return std::set_intersection(a0, a1, b0, b1, out);
    });
  }

  friend bool operator==(const SiteSet& a, const SiteSet& b) {
    return a.dim_ == b.dim_ && a.sites_ == b.sites_;
  }

  void check_same_dimension(const SiteSet& other) const {
    if (dim_ != other.dim_)
      throw DimensionError("site sets of dimension " + std::to_string(dim_) + " and " +
                           std::to_string(other.dim_) + " cannot be combined");
  }

private:
  template <class Op>
  SiteSet combine(const SiteSet& other, Op op) const {
    check_same_dimension(other);
    SiteSet out(dim_);
    op(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
       std::back_inserter(out.sites_));
    return out;
  }

  std::size_t dim_;
  std::vector<Site> sites_;
};

inline std::string to_string(const SiteSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += to_string(s[i]);
  }
  return out + "}";
}

/// Minimum pairwise l1 distance; kInfiniteDistance if either set is empty.
inline Distance set_distance(const SiteSet& a, const SiteSet& b) {
  a.check_same_dimension(b);
  Distance best = kInfiniteDistance;
  for (const auto& x : a)
    for (const auto& y : b) best = std::min(best, l1_distance(x, y));
  return best;
}

inline Distance set_distance(const Site& x, const SiteSet& b) {
  return set_distance(SiteSet::from_sites(b.dimension(), {x}), b);
}

/// b_x(R) = {y in lattice : d(x,y) <= R}.
inline SiteSet ball(const Site& x, Distance radius, const SiteSet& lattice) {
  if (!lattice.contains(x))
    throw GeometryError("ball: center " + to_string(x) + " is not in the lattice");
  std::vector<Site> out;
  for (const auto& y : lattice)
    if (l1_distance(x, y) <= radius) out.push_back(y);
  return SiteSet::from_sites(lattice.dimension(), std::move(out));
}

/// Calls visit(site) for every site at l1 distance exactly r from center.
/// Returning false from visit stops the enumeration; the function then returns false.
template <class Visit>
bool for_each_on_shell(const Site& center, Distance r, Visit&& visit) {
  const std::size_t dim = center.dimension();
  Site cur = center;
  std::function<bool(std::size_t, Distance)> rec = [&](std::size_t axis, Distance left) -> bool {
    if (axis + 1 == dim) {
      cur.coords[axis] = center.coords[axis] + left;
      if (!visit(static_cast<const Site&>(cur))) return false;
      if (left != 0) {
        cur.coords[axis] = center.coords[axis] - left;
        if (!visit(static_cast<const Site&>(cur))) return false;
      }
      cur.coords[axis] = center.coords[axis];
      return true;
    }
    for (Distance step = -left; step <= left; ++step) {
      cur.coords[axis] = center.coords[axis] + step;
      if (!rec(axis + 1, left - std::llabs(step))) return false;
    }
    cur.coords[axis] = center.coords[axis];
    return true;
  };
  return rec(0, r);
}

/// dist(x, Z^nu \ region), found by growing l1 shells around x until one leaves the region.
inline Distance complement_distance(const Site& x, const SiteSet& region) {
  if (x.dimension() != region.dimension())
    throw DimensionError("complement_distance: dimension mismatch for " + to_string(x));
  if (!region.contains(x)) return 0;
  for (Distance r = 1;; ++r) {
    bool inside = for_each_on_shell(x, r, [&](const Site& y) { return region.contains(y); });
    if (!inside) return r;
  }
}

/// dist(Y, Z^nu \ region); kInfiniteDistance for empty Y.
inline Distance complement_distance(const SiteSet& y, const SiteSet& region) {
  y.check_same_dimension(region);
  Distance best = kInfiniteDistance;
  for (const auto& s : y) best = std::min(best, complement_distance(s, region));
  return best;
}

/// Bulk {x in region : dist(x, Z^nu \ region) > 2R}.
inline SiteSet bulk(const SiteSet& region, Distance range) {
  std::vector<Site> out;
  for (const auto& x : region)
    if (complement_distance(x, region) > 2 * range) out.push_back(x);
  return SiteSet::from_sites(region.dimension(), std::move(out));
}

struct DistanceIdentity {
  Distance lhs = 0;
  Distance rhs = 0;
  bool holds() const noexcept { return lhs == rhs; }
};

/// Evaluates both sides of
///   dist(Y, Z^nu \ (Lambda\X)^o) = min{ dist(Y, Z^nu \ Lambda^o), dist(Y, X) - 2R }
/// independently. Requires Y inside the bulk of Lambda \ X.
inline DistanceIdentity bulk_distance_identity_check(const SiteSet& y, const SiteSet& x,
                                                     const SiteSet& lattice, Distance range) {
  const SiteSet restricted = lattice.set_difference(x);
  const SiteSet restricted_bulk = bulk(restricted, range);
  if (!y.is_subset_of(restricted_bulk))
    throw GeometryError("bulk_distance_identity_check: Y = " + to_string(y) +
                        " is not inside the bulk of Lambda \\ X");
  DistanceIdentity out;
  out.lhs = complement_distance(y, restricted_bulk);
  const Distance to_outer = complement_distance(y, bulk(lattice, range));
  const Distance to_x = set_distance(y, x);
  out.rhs = is_infinite(to_x) ? to_outer : std::min(to_outer, to_x - 2 * range);
  return out;
}

} // namespace lppl
