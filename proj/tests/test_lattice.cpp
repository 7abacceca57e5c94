#include <gtest/gtest.h>

#include <cstdlib>

#include "lppl/lattice.hpp"
#include "support/generators.hpp"

using namespace lppl;
using namespace lppl::testing;

namespace {

Distance brute_l1(const Site& a, const Site& b) {
  Distance d = 0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) d += a.coords[i] > b.coords[i] ? a.coords[i] - b.coords[i] : b.coords[i] - a.coords[i];
  return d;
}

Distance brute_set_distance(const SiteSet& a, const SiteSet& b) {
  Distance best = kInfiniteDistance;
  for (const auto& x : a)
    for (const auto& y : b) best = std::min(best, brute_l1(x, y));
  return best;
}

// Complement distance by scanning a bounding box that reaches past the region.
Distance box_complement_distance(const Site& x, const SiteSet& region) {
  if (!region.contains(x)) return 0;
  Distance best = kInfiniteDistance;
  const Coord pad = static_cast<Coord>(region.size()) + 2;
  std::vector<CoordRange> ranges;
  for (auto c : x.coords) ranges.push_back({c - pad, c + pad});
  for (const auto& y : SiteSet::box(ranges))
    if (!region.contains(y)) best = std::min(best, brute_l1(x, y));
  return best;
}

SiteSet random_blob(Rng& rng) {
  std::vector<CoordRange> r = {{0, static_cast<Coord>(uniform_index(rng, 2, 6))},
                               {0, static_cast<Coord>(uniform_index(rng, 2, 6))}};
  SiteSet box = SiteSet::box(r);
  const SiteSet holes = random_site_set(rng, 2, uniform_index(rng, 0, 4), 0, 6);
  return box.set_difference(holes);
}

} // namespace

TEST(Lattice, L1Distance) {
  EXPECT_EQ(l1_distance(Site{0, 0}, Site{0, 0}), 0);
  EXPECT_EQ(l1_distance(Site{0, 0}, Site{2, -3}), 5);
  EXPECT_THROW(l1_distance(Site{0}, Site{0, 1}), DimensionError);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const std::size_t dim = uniform_index(rng, 1, 3);
    const Site a = random_site(rng, dim, -20, 20), b = random_site(rng, dim, -20, 20);
    EXPECT_EQ(l1_distance(a, b), brute_l1(a, b));
  }
}

TEST(Lattice, SetDistance) {
  EXPECT_EQ(set_distance(SiteSet::interval(0, 0), SiteSet::interval(5, 5)), 5);
  EXPECT_EQ(set_distance(SiteSet::interval(0, 4), SiteSet::interval(3, 9)), 0);
  EXPECT_EQ(set_distance(SiteSet(1), SiteSet::interval(0, 3)), kInfiniteDistance);
  EXPECT_THROW(set_distance(SiteSet::interval(0, 1), SiteSet::box({{0, 1}, {0, 1}})), DimensionError);
}

TEST(Lattice, SetDistanceProperties) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const std::size_t dim = uniform_index(rng, 1, 2);
    const SiteSet a = random_site_set(rng, dim, uniform_index(rng, 1, 5), -6, 6);
    const SiteSet b = random_site_set(rng, dim, uniform_index(rng, 1, 5), -6, 6);
    EXPECT_EQ(set_distance(a, b), brute_set_distance(a, b));
    EXPECT_EQ(set_distance(a, b), set_distance(b, a));
    EXPECT_EQ(set_distance(a, b) == 0, a.intersects(b));
  }
}

TEST(Lattice, SiteSetCanonicalOrder) {
  EXPECT_THROW(SiteSet::from_sites(2, {Site{1, 0}, Site{1, 0}}), GeometryError);
  EXPECT_THROW(SiteSet::from_sites(2, {Site{1}}), DimensionError);
  const SiteSet s = SiteSet::from_sites(2, {Site{1, 0}, Site{0, 5}, Site{0, 1}});
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], (Site{0, 1}));
  EXPECT_EQ(s[1], (Site{0, 5}));
  EXPECT_EQ(s[2], (Site{1, 0}));
}

TEST(Lattice, Ball) {
  const SiteSet lam = SiteSet::interval(0, 9);
  EXPECT_EQ(ball(Site{4}, 0, lam), SiteSet::interval(4, 4));
  EXPECT_EQ(ball(Site{4}, 1, lam), SiteSet::interval(3, 5));
  EXPECT_EQ(ball(Site{0}, 2, lam), SiteSet::interval(0, 2));
  EXPECT_THROW(ball(Site{12}, 1, lam), GeometryError);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const SiteSet blob = random_blob(rng);
    const Site x = blob[uniform_index(rng, 0, blob.size() - 1)];
    const auto r = static_cast<Distance>(uniform_index(rng, 0, 4));
    std::vector<Site> expect;
    for (const auto& y : blob)
      if (brute_l1(x, y) <= r) expect.push_back(y);
    const SiteSet b = ball(x, r, blob);
    EXPECT_EQ(b, SiteSet::from_sites(2, expect));
    EXPECT_TRUE(b.is_subset_of(ball(x, r + 1, blob)));
  }
}

TEST(Lattice, Bulk) {
  EXPECT_EQ(bulk(SiteSet::interval(0, 9), 1), SiteSet::interval(2, 7));
  EXPECT_TRUE(bulk(SiteSet::interval(3, 3), 1).empty());
  EXPECT_TRUE(bulk(SiteSet::interval(3, 3), 4).empty());

  Rng rng(4);
  for (int i = 0; i < 60; ++i) {
    const SiteSet blob = random_blob(rng);
    const auto r = static_cast<Distance>(uniform_index(rng, 1, 2));
    std::vector<Site> expect;
    for (const auto& x : blob)
      if (box_complement_distance(x, blob) > 2 * r) expect.push_back(x);
    const SiteSet b = bulk(blob, r);
    EXPECT_EQ(b, SiteSet::from_sites(2, expect));
    EXPECT_TRUE(b.is_subset_of(blob));
    EXPECT_TRUE(bulk(blob, r + 1).is_subset_of(b));
  }
}

TEST(Lattice, BulkDistanceIdentity) {
  const SiteSet lam = SiteSet::interval(0, 19);
  const SiteSet x = SiteSet::interval(19, 19);
  auto id = bulk_distance_identity_check(SiteSet::interval(5, 5), x, lam, 1);
  EXPECT_TRUE(id.holds());
  EXPECT_EQ(id.lhs, 4);  // bulk of {0..18} is {2..16}; complement starts at 1

  // Y at the edge of the bulk {2..16}.
  id = bulk_distance_identity_check(SiteSet::interval(2, 2), x, lam, 1);
  EXPECT_EQ(id.lhs, 1);
  EXPECT_EQ(id.rhs, 1);
  id = bulk_distance_identity_check(SiteSet::interval(16, 16), x, lam, 1);
  EXPECT_EQ(id.lhs, 1);
  EXPECT_EQ(id.rhs, 1);

  EXPECT_THROW(bulk_distance_identity_check(SiteSet::interval(1, 1), x, lam, 1), GeometryError);
}

TEST(Lattice, BulkDistanceIdentityRandom) {
  Rng rng(5);
  int tested = 0;
  while (tested < 100) {
    const std::size_t dim = uniform_index(rng, 1, 2);
    const Coord side = static_cast<Coord>(uniform_index(rng, dim == 1 ? 8 : 5, dim == 1 ? 25 : 9));
    const SiteSet lam = SiteSet::box(std::vector<CoordRange>(dim, CoordRange{0, side - 1}));
    const SiteSet x = random_site_set(rng, dim, uniform_index(rng, 0, 3), 0, side - 1);
    const auto r = static_cast<Distance>(uniform_index(rng, 1, 2));
    const SiteSet inner = bulk(lam.set_difference(x), r);
    if (inner.empty()) continue;
    const SiteSet y = SiteSet::from_sites(dim, {inner[uniform_index(rng, 0, inner.size() - 1)]});
    const auto id = bulk_distance_identity_check(y, x, lam, r);
    EXPECT_TRUE(id.holds()) << to_string(y) << " X=" << to_string(x) << " R=" << r;
    ++tested;
  }
}
