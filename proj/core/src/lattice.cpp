#include "bangbang/lattice.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "bangbang/errors.hpp"

namespace bangbang {

std::string_view to_string(Boundary b) {
  return b == Boundary::open ? "open" : "periodic";
}

Boundary parse_boundary(std::string_view text) {
  if (text == "open") return Boundary::open;
  if (text == "periodic") return Boundary::periodic;
  throw InvalidArgument("unknown boundary '" + std::string(text) +
                        "' (expected open or periodic)");
}

std::vector<Bond> build_lattice(const LatticeSpec& spec) {
  const int L = spec.side_length;
  if (L < 1) throw InvalidArgument("side_length must be >= 1");
  const bool periodic = spec.boundary == Boundary::periodic;
  if (periodic && L <= 2 && !spec.deduplicate) {
    throw InvalidArgument(
        "periodic boundary with side_length <= 2 repeats bonds; enable "
        "deduplication explicitly");
  }

  std::vector<Bond> bonds;
  std::set<Bond> seen;
  auto add = [&](int a, int b) {
    if (a == b) return;  // only reachable for L = 1 periodic
    Bond bond{std::min(a, b), std::max(a, b)};
    if (seen.insert(bond).second) bonds.push_back(bond);
  };

  const int wrap = periodic ? L : L - 1;
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < wrap; ++c) add(r * L + c, r * L + (c + 1) % L);
  for (int r = 0; r < wrap; ++r)
    for (int c = 0; c < L; ++c) add(r * L + c, ((r + 1) % L) * L + c);
  return bonds;
}

std::optional<Config> hop(Config config, int i, int j) {
  const Config mi = Config{1} << i;
  const Config mj = Config{1} << j;
  const bool bi = (config & mi) != 0;
  const bool bj = (config & mj) != 0;
  if (bi == bj) return std::nullopt;
  return config ^ (mi | mj);
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) result = result * static_cast<std::uint64_t>(n - k + i) / i;
  return result;
}

SectorBasis::SectorBasis(int sites, int occupants, std::size_t max_dimension)
    : sites_(sites), occupants_(occupants) {
  if (sites < 1 || sites > 63)
    throw InvalidArgument("number of sites must be in [1, 63]");
  if (occupants < 0 || occupants > sites)
    throw InvalidArgument("occupant count C out of range [0, M]");
  const std::uint64_t dim = binomial(sites, occupants);
  if (dim > max_dimension) {
    throw InvalidArgument("sector dimension " + std::to_string(dim) +
                          " exceeds the configured maximum " +
                          std::to_string(max_dimension));
  }

  choose_.assign(sites + 1, std::vector<std::uint64_t>(occupants + 2, 0));
  for (int n = 0; n <= sites; ++n)
    for (int k = 0; k <= occupants + 1; ++k) choose_[n][k] = binomial(n, k);

  states_.reserve(dim);
  if (occupants == 0) {
    states_.push_back(0);
    return;
  }
  // Gosper's hack walks fixed-popcount words in increasing order.
  Config x = (Config{1} << occupants) - 1;
  const Config limit = Config{1} << sites;
  while (x < limit) {
    states_.push_back(x);
    const Config lowest = x & (~x + 1);
    const Config ripple = x + lowest;
    x = (((ripple ^ x) >> 2) / lowest) | ripple;
    if (ripple == 0) break;
  }
}

std::size_t SectorBasis::rank(Config config) const {
  if (std::popcount(config) != occupants_ ||
      (sites_ < 64 && (config >> sites_) != 0)) {
    throw InvalidArgument("configuration is not in the sector");
  }
  std::uint64_t r = 0;
  int k = 1;
  for (Config rest = config; rest != 0; rest &= rest - 1, ++k)
    r += choose_[std::countr_zero(rest)][k];
  return static_cast<std::size_t>(r);
}

SectorBasis enumerate_sector(int sites, int occupants,
                             std::size_t max_dimension) {
  return SectorBasis(sites, occupants, max_dimension);
}

}  // namespace bangbang
