#include <bangbang/lattice.hpp>
#include <bangbang/errors.hpp>
#include <gtest/gtest.h>

#include <bit>
#include <set>

using namespace bangbang;

TEST(Lattice, OpenTwoByTwoBonds) {
  const auto bonds = build_lattice({2, Boundary::open});
  const std::vector<Bond> expected{{0, 1}, {2, 3}, {0, 2}, {1, 3}};
  EXPECT_EQ(bonds, expected);
}

TEST(Lattice, BondCounts) {
  for (int L = 1; L <= 6; ++L) EXPECT_EQ(build_lattice({L, Boundary::open}).size(), std::size_t(2 * L * (L - 1)));
  for (int L = 3; L <= 6; ++L) EXPECT_EQ(build_lattice({L, Boundary::periodic}).size(), std::size_t(2 * L * L));
}

TEST(Lattice, PeriodicSmallNeedsDeduplication) {
  EXPECT_THROW(build_lattice({2, Boundary::periodic}), InvalidArgument);
  EXPECT_THROW(build_lattice({1, Boundary::periodic}), InvalidArgument);
  const auto bonds = build_lattice({2, Boundary::periodic, true});
  EXPECT_EQ(bonds.size(), 4u);
  EXPECT_EQ(build_lattice({1, Boundary::periodic, true}).size(), 0u);
}

TEST(Lattice, BondsAreValidAndDistinct) {
  for (Boundary b : {Boundary::open, Boundary::periodic})
    for (int L = 3; L <= 5; ++L) {
      const auto bonds = build_lattice({L, b});
      std::set<Bond> seen(bonds.begin(), bonds.end());
      EXPECT_EQ(seen.size(), bonds.size());
      for (const Bond& bond : bonds) {
        EXPECT_LT(bond.i, bond.j);
        EXPECT_GE(bond.i, 0);
        EXPECT_LT(bond.j, L * L);
      }
    }
}

TEST(Lattice, RejectsBadSide) { EXPECT_THROW(build_lattice({0, Boundary::open}), InvalidArgument); }

TEST(Lattice, BoundaryNames) {
  EXPECT_EQ(parse_boundary("open"), Boundary::open);
  EXPECT_EQ(parse_boundary(to_string(Boundary::periodic)), Boundary::periodic);
  EXPECT_THROW(parse_boundary("twisted"), InvalidArgument);
}

TEST(Hop, Examples) {
  EXPECT_EQ(hop(0b0101, 0, 1), Config{0b0110});
  EXPECT_FALSE(hop(0b0011, 0, 1).has_value());
  EXPECT_FALSE(hop(0b0110, 1, 2).has_value());
}

TEST(Hop, PreservesPopcount) {
  for (Config c = 0; c < 256; ++c)
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j)
        if (auto h = hop(c, i, j)) EXPECT_EQ(std::popcount(*h), std::popcount(c));
}

TEST(Sector, Dimensions) {
  EXPECT_EQ(SectorBasis(4, 2).size(), 6u);
  EXPECT_EQ(SectorBasis(9, 2).size(), 36u);
  EXPECT_EQ(SectorBasis(9, 4).size(), 126u);
}

TEST(Sector, CountsMatchDirectEnumeration) {
  for (int m = 1; m <= 12; ++m)
    for (int c = 0; c <= m; ++c) {
      std::size_t direct = 0;
      for (Config x = 0; x < (Config{1} << m); ++x) direct += std::popcount(x) == c;
      const SectorBasis basis(m, c, 1u << 12);
      ASSERT_EQ(basis.size(), direct) << m << ' ' << c;
      ASSERT_EQ(basis.size(), binomial(m, c));
    }
}

TEST(Sector, OrderedAndRanked) {
  for (int m = 1; m <= 10; ++m)
    for (int c = 0; c <= m; ++c) {
      const SectorBasis basis(m, c);
      for (std::size_t k = 0; k < basis.size(); ++k) {
        EXPECT_EQ(std::popcount(basis.state(k)), c);
        if (k > 0) EXPECT_LT(basis.state(k - 1), basis.state(k));
        EXPECT_EQ(basis.rank(basis.unrank(k)), k);
      }
    }
}

TEST(Sector, ParticleHoleMirror) {
  for (int m = 2; m <= 9; ++m)
    for (int c = 0; c <= m; ++c) {
      const SectorBasis a(m, c), b(m, m - c);
      ASSERT_EQ(a.size(), b.size());
      const Config mask = (Config{1} << m) - 1;
      std::set<std::size_t> image;
      for (Config x : a.states()) image.insert(b.rank(~x & mask));
      EXPECT_EQ(image.size(), b.size());
    }
}

TEST(Sector, Errors) {
  EXPECT_THROW(SectorBasis(4, 5), InvalidArgument);
  EXPECT_THROW(SectorBasis(4, -1), InvalidArgument);
  EXPECT_THROW(SectorBasis(16, 8, 6000), InvalidArgument);  // 12870 states
  const SectorBasis basis(4, 2);
  EXPECT_THROW(basis.rank(0b0111), InvalidArgument);
  EXPECT_THROW(basis.rank(0b10011), InvalidArgument);
}
