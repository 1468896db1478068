#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bangbang/hamiltonian.hpp"

namespace bangbang {

// Control pair of a bang-bang interval. Bit 1 is J, bit 0 is K.
enum class Bang : std::uint8_t { none = 0, k_only = 1, j_only = 2, both = 3 };

constexpr bool j_on(Bang b) { return (static_cast<unsigned>(b) & 2U) != 0; }
constexpr bool k_on(Bang b) { return (static_cast<unsigned>(b) & 1U) != 0; }
constexpr Bang make_bang(bool j, bool k) {
  return static_cast<Bang>((j ? 2U : 0U) | (k ? 1U : 0U));
}
constexpr Bang flip_j(Bang b) { return static_cast<Bang>(static_cast<unsigned>(b) ^ 2U); }
constexpr Bang flip_k(Bang b) { return static_cast<Bang>(static_cast<unsigned>(b) ^ 1U); }
constexpr Couplings couplings(Bang b) {
  return {j_on(b) ? 1.0 : 0.0, k_on(b) ? 1.0 : 0.0};
}

// The three control pairs that generate evolution; (0,0) is the identity.
inline constexpr std::array<Bang, 3> kActiveBangs = {Bang::both, Bang::j_only,
                                                     Bang::k_only};

struct Amplitudes {
  double j = 0.0;
  double k = 0.0;
  bool operator==(const Amplitudes&) const = default;
};

// N equal intervals with per-interval (J, K) in [0, 1].
struct PiecewiseProtocol {
  double tau = 0.0;
  std::vector<Amplitudes> values;

  std::size_t intervals() const { return values.size(); }
  // Every value is exactly 0 or 1 and no interval is (0, 0).
  bool is_discrete() const;
  void validate() const;
};

std::vector<Bang> to_bangs(const PiecewiseProtocol& p);
PiecewiseProtocol from_bangs(double tau, std::span<const Bang> bangs);

// One control in the jump representation.
struct ControlTrace {
  bool initial_on = false;
  std::vector<double> jumps;  // strictly increasing, inside (0, tau)

  bool value_at(double t) const;
  bool final_on() const { return initial_on != (jumps.size() % 2 == 1); }
  bool operator==(const ControlTrace&) const = default;
};

struct JumpProtocol {
  double tau = 0.0;
  ControlTrace j;
  ControlTrace k;

  Bang bang_at(double t) const { return make_bang(j.value_at(t), k.value_at(t)); }
  std::size_t jump_count() const { return j.jumps.size() + k.jumps.size(); }
  void validate() const;
  bool operator==(const JumpProtocol&) const = default;
};

// Constant-control piece of a jump protocol.
struct Segment {
  double start = 0.0;
  double length = 0.0;
  Bang bang = Bang::none;
};

// Segments in time order; zero-length pieces (simultaneous jumps) are dropped.
std::vector<Segment> segments(const JumpProtocol& p);

JumpProtocol to_jump(const PiecewiseProtocol& p);

// Samples a jump protocol at the midpoints of N equal intervals.
PiecewiseProtocol sample(const JumpProtocol& p, std::size_t intervals);

struct PulseStats {
  int p_j = 0;
  int p_k = 0;
  std::optional<double> on_fraction_j;  // t_on / (P tau)
  std::optional<double> on_fraction_k;
};

PulseStats count_pulses(const JumpProtocol& p);

// Rescales time to [0, 1].
JumpProtocol normalize(const JumpProtocol& p);

struct Canonicalized {
  JumpProtocol protocol;
  double removed_measure = 0.0;
};

// Merges pulses and gaps shorter than min_width * tau into their neighbours,
// shortest first.
Canonicalized canonicalize(const JumpProtocol& p, double min_width);

// The same protocol run backwards in time.
JumpProtocol time_reversed(const JumpProtocol& p);

}  // namespace bangbang
