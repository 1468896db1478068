#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "bangbang/sweep.hpp"

namespace bangbang {

struct PulseLabel {
  int p_j = 0;
  int p_k = 0;
  int total() const { return p_j + p_k; }
  bool operator==(const PulseLabel&) const = default;
};

// Row-major grid of pulse labels; empty entries are absent cells.
struct PulseMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::optional<PulseLabel>> labels;

  const std::optional<PulseLabel>& at(std::size_t i, std::size_t j) const {
    return labels.at(i * cols + j);
  }
  static PulseMap from(const SweepGrid& grid);
};

struct CellIndex {
  std::size_t i = 0;
  std::size_t j = 0;
  bool operator==(const CellIndex&) const = default;
};

struct PhaseRegion {
  int id = 0;
  PulseLabel label;
  std::vector<CellIndex> cells;
};

struct PhaseBoundary {
  CellIndex a;  // neighbours with different labels, a before b row-major
  CellIndex b;
};

struct PhaseMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int> region;  // per cell, -1 where absent
  std::vector<PhaseRegion> regions;
  std::vector<PhaseBoundary> boundaries;
  // Boundaries where the labels differ by more than one pulse in one control.
  std::vector<PhaseBoundary> unlayered;

  bool layered() const { return unlayered.empty(); }
  int region_at(std::size_t i, std::size_t j) const { return region.at(i * cols + j); }
};

// 4-neighbour connected components of equal (P_J, P_K).
PhaseMap detect_phases(const PulseMap& map);
PhaseMap detect_phases(const SweepGrid& grid);

// Width / tau of the narrowest interior pulse or interior gap of one control.
std::optional<double> nascent_width(const JumpProtocol& p, Control control);

struct BoundaryProfile {
  PhaseBoundary boundary;
  CellIndex high;              // the side with more pulses
  Control control = Control::j;
  std::vector<double> widths;  // nascent widths stepping away from the boundary
  bool monotone = false;       // widths strictly increase away from the boundary
};

// For each boundary whose sides differ by one pulse in one control, the
// nascent pulse widths of up to `depth` cells stepping into the higher side.
std::vector<BoundaryProfile> boundary_profiles(const SweepGrid& grid, const PhaseMap& phases,
                                               std::size_t depth = 3);

}  // namespace bangbang
