#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bangbang/correlation.hpp"
#include "bangbang/hamiltonian.hpp"
#include "bangbang/optimizer.hpp"
#include "bangbang/protocol.hpp"

namespace bangbang {

struct SystemSpec {
  LatticeSpec lattice;
  int occupants = 2;

  int sites() const { return lattice.sites(); }
  std::string label() const;  // e.g. "M=4 C=2 open"
  bool operator==(const SystemSpec& o) const {
    return lattice.side_length == o.lattice.side_length && lattice.boundary == o.lattice.boundary &&
           lattice.deduplicate == o.lattice.deduplicate && occupants == o.occupants;
  }
};

// Values of ln r shared by the r_i (row) and r_t (column) axes.
struct GridAxis {
  std::vector<double> ln_r;

  static GridAxis uniform(double lo, double hi, std::size_t points);
  std::size_t size() const { return ln_r.size(); }
  void validate() const;  // non-empty, finite, strictly increasing
  bool operator==(const GridAxis&) const = default;
};

inline constexpr double kDefaultSkipThreshold = 0.999;
inline constexpr double kDefaultWidthFloor = 1e-4;
inline constexpr std::size_t kDefaultGridPoints = 21;
inline constexpr double kDefaultGridLo = -2.2;
inline constexpr double kDefaultGridHi = 2.2;

struct CellResult {
  std::size_t i = 0;  // row: ln r_i = axis[i]
  std::size_t j = 0;  // column: ln r_t = axis[j]
  double ln_ri = 0.0;
  double ln_rt = 0.0;
  std::uint64_t seed = 0;
  double overlap = 0.0;  // |<target|initial>|^2
  bool skipped = false;
  std::optional<std::string> error;

  double tau_critical = 0.0;
  double tau_extrapolated = 0.0;
  double ds = 0.0;
  bool tolerance_met = false;
  int p_j = 0;  // pulse counts after removing sub-floor slivers
  int p_k = 0;
  std::optional<double> on_fraction_j;
  std::optional<double> on_fraction_k;
  JumpProtocol protocol;
  std::vector<std::pair<double, double>> history;  // (tau, D_S) probes

  bool ok() const { return !skipped && !error; }
  bool operator==(const CellResult&) const = default;
};

struct SweepGrid {
  SystemSpec system;
  GridAxis axis;
  std::uint64_t seed = 0;
  std::vector<std::optional<CellResult>> cells;  // row-major, empty if not computed

  std::size_t rows() const { return axis.size(); }
  std::size_t cols() const { return axis.size(); }
  const std::optional<CellResult>& at(std::size_t i, std::size_t j) const {
    return cells.at(i * cols() + j);
  }
  std::optional<CellResult>& at(std::size_t i, std::size_t j) { return cells.at(i * cols() + j); }
  // Computed cell with a pipeline result.
  const CellResult* ok_cell(std::size_t i, std::size_t j) const;
};

struct SweepOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double skip_threshold = kDefaultSkipThreshold;
  double width_floor = kDefaultWidthFloor;
  // Stop after this many newly computed cells (for interruption tests).
  std::optional<std::size_t> max_new_cells;
};

struct SweepHooks {
  // Previously persisted cell, if valid; enables resuming.
  std::function<std::optional<CellResult>(std::size_t i, std::size_t j)> load;
  // Called for each new cell from a single writer at a time.
  std::function<void(const CellResult&)> store;
};

// Seed of cell (i, j) derived from the sweep seed.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t i, std::size_t j);

// One grid cell: ground states, skip test, tau search and pulse counts.
// Failures are recorded in the cell rather than thrown.
CellResult compute_cell(const XxzSystem& system, const ControlSpectra& spectra,
                        const GridAxis& axis, std::size_t i, std::size_t j,
                        const PipelineConfig& config, const SweepOptions& options);

SweepGrid run_sweep(const SystemSpec& system, const GridAxis& axis,
                    const PipelineConfig& config, const SweepOptions& options,
                    const SweepHooks& hooks = {});

struct OverlapGrid {
  Eigen::MatrixXd overlap;                 // NaN where a ground state is degenerate
  std::vector<std::uint8_t> degenerate;    // per axis point
};

OverlapGrid overlap_grid(const XxzSystem& system, const GridAxis& axis);

// Number of off-diagonal cells that the overlap test would skip.
std::size_t count_skipped(const OverlapGrid& grid, double threshold);

struct TauRatio {
  Eigen::MatrixXd log_ratio;  // ln(tau_a / tau_b), NaN where either is absent
  double mean_a = 0.0, std_a = 0.0;
  double mean_b = 0.0, std_b = 0.0;
  double mean_log = 0.0, std_log = 0.0;
  std::size_t cells = 0;  // cells present in both grids
  // Fraction of shared cells with ln r_i < 0 and ln r_t < 0 where tau_a > tau_b.
  std::optional<double> negative_quadrant_a_longer;
};

// Throws IncompatibleInputs unless both grids share lattice and axis.
TauRatio tau_ratio(const SweepGrid& a, const SweepGrid& b);

// Rank correlation with average ranks for ties; needs >= 2 points.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Per row, Spearman correlation of tau_critical against overlap over the
// computed cells (empty when fewer than three).
std::vector<std::optional<double>> row_spearman(const SweepGrid& grid);

// C_m of each computed cell's control against the reference cell, NaN
// elsewhere. Throws InvalidArgument if the reference has no protocol.
Eigen::MatrixXd correlation_map(const SweepGrid& grid, std::size_t ref_i,
                                std::size_t ref_j, Control control);

}  // namespace bangbang
