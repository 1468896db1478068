#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bangbang {

enum class Boundary { open, periodic };

std::string_view to_string(Boundary b);
Boundary parse_boundary(std::string_view text);

struct LatticeSpec {
  int side_length = 2;
  Boundary boundary = Boundary::open;
  // Periodic wrapping on L <= 2 produces repeated site pairs. They are
  // rejected unless this is set, in which case duplicates are dropped.
  bool deduplicate = false;

  int sites() const { return side_length * side_length; }
};

// Nearest-neighbour pair with i < j.
struct Bond {
  int i = 0;
  int j = 0;
  auto operator<=>(const Bond&) const = default;
};

// Bonds of the L x L square lattice with site index row * L + col. Horizontal
// bonds come first (row by row), then vertical bonds.
std::vector<Bond> build_lattice(const LatticeSpec& spec);

// Spin configuration: bit s set means site s is spin-up (occupied).
using Config = std::uint64_t;

// Exchanges the occupations of sites i and j when they differ.
std::optional<Config> hop(Config config, int i, int j);

std::uint64_t binomial(int n, int k);

inline constexpr std::size_t kDefaultMaxDimension = 6000;

// All M-bit configurations with exactly C set bits, in ascending numeric
// order. Ranks are computed with the combinatorial number system, which
// coincides with that order for fixed popcount.
class SectorBasis {
 public:
  SectorBasis(int sites, int occupants,
              std::size_t max_dimension = kDefaultMaxDimension);

  int sites() const { return sites_; }
  int occupants() const { return occupants_; }
  std::size_t size() const { return states_.size(); }

  Config state(std::size_t index) const { return states_.at(index); }
  std::span<const Config> states() const { return states_; }

  // Index of a configuration; throws InvalidArgument for configurations
  // outside the sector.
  std::size_t rank(Config config) const;
  Config unrank(std::size_t index) const { return state(index); }

 private:
  int sites_;
  int occupants_;
  std::vector<Config> states_;
  std::vector<std::vector<std::uint64_t>> choose_;  // choose_[n][k]
};

SectorBasis enumerate_sector(int sites, int occupants,
                             std::size_t max_dimension = kDefaultMaxDimension);

}  // namespace bangbang
