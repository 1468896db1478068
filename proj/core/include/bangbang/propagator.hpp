#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "bangbang/hamiltonian.hpp"
#include "bangbang/protocol.hpp"

namespace bangbang {

// Eigendecompositions of H(1,1), H(1,0) and H(0,1). Shared by the unitary
// cache, continuous propagation and the conjugate-state sampler.
class ControlSpectra {
 public:
  ControlSpectra(const SectorOperator& o_j, const SectorOperator& o_k);
  explicit ControlSpectra(const XxzSystem& system)
      : ControlSpectra(system.o_j, system.o_k) {}

  const EigenDecomposition& operator[](Bang b) const;
  const Matrix& generator(Bang b) const;
  Eigen::Index dim() const { return dim_; }

  // psi <- V exp(-i dt D) V^dagger psi. Two mat-vecs and one diagonal
  // scaling; `scratch` is resized as needed. Negative dt evolves backwards.
  void apply(Bang b, double dt, Vector& psi, Vector& scratch) const;

  // exp(-i dt H) assembled from the stored decomposition.
  Matrix unitary(Bang b, double dt) const;

 private:
  Eigen::Index dim_;
  std::array<EigenDecomposition, 3> eig_;
  std::array<Matrix, 3> generators_;
};

// exp(-i (tau/N) H) for N = n_min, 2 n_min, ..., n_max and the three active
// control pairs.
class UnitaryCache {
 public:
  UnitaryCache(const ControlSpectra& spectra, double tau, std::size_t n_min,
               std::size_t n_max);

  double tau() const { return tau_; }
  std::size_t n_min() const { return n_min_; }
  std::size_t n_max() const { return n_max_; }
  const std::vector<std::size_t>& interval_counts() const { return counts_; }
  // Stored matrices: three per interval count.
  std::size_t size() const { return 3 * unitaries_.size(); }
  bool has(std::size_t intervals) const;
  const Matrix& unitary(std::size_t intervals, Bang b) const;
  const ControlSpectra& spectra() const { return *spectra_; }

 private:
  std::size_t level(std::size_t intervals) const;

  const ControlSpectra* spectra_;
  double tau_;
  std::size_t n_min_;
  std::size_t n_max_;
  std::vector<std::size_t> counts_;
  std::vector<std::array<Matrix, 3>> unitaries_;
};

// One application of a cached unitary covering `length` fine intervals.
struct PlanStep {
  std::size_t start = 0;
  std::size_t length = 1;
  Bang bang = Bang::none;
};

// Aligned runs of identical intervals merged into the coarsest cached
// unitary that covers them exactly.
std::vector<PlanStep> coarse_skip(std::span<const Bang> protocol,
                                  const UnitaryCache& cache,
                                  std::size_t from = 0);

// States after each applied step of the current protocol. Index k holds the
// state after k fine intervals; indices inside merged steps are absent.
class PrefixCache {
 public:
  PrefixCache(Vector psi0, std::size_t intervals);

  std::size_t intervals() const { return states_.size() - 1; }
  std::size_t valid_up_to() const { return valid_up_to_; }
  bool has(std::size_t k) const { return k <= valid_up_to_ && known_[k]; }
  const Vector& at(std::size_t k) const;
  const Vector& final_state() const { return at(intervals()); }

  // Latest known state at or before k.
  std::size_t anchor(std::size_t k) const;
  void store(std::size_t k, const Vector& psi);
  // Drops everything after k.
  void truncate(std::size_t k);

 private:
  std::vector<Vector> states_;
  std::vector<char> known_;
  std::size_t valid_up_to_ = 0;
};

// Final state of a discrete protocol. Only intervals from `changed_at` on are
// recomputed; changed_at >= N with a complete prefix returns the cached state.
Vector evolve_discrete(const Vector& psi0, std::span<const Bang> protocol,
                       const UnitaryCache& cache, PrefixCache& prefix,
                       std::size_t changed_at);
Vector evolve_discrete(const Vector& psi0, std::span<const Bang> protocol,
                       const UnitaryCache& cache);

// Evaluates single-interval changes of a discrete protocol against a prefix
// cache without committing them.
class IncrementalEvolver {
 public:
  IncrementalEvolver(const UnitaryCache& cache, Vector psi0,
                     std::vector<Bang> protocol);

  const std::vector<Bang>& protocol() const { return protocol_; }
  const Vector& final_state() const { return prefix_.final_state(); }

  const Vector& propose(std::size_t index, Bang value);
  void accept();

 private:
  const UnitaryCache* cache_;
  Vector psi0_;
  std::vector<Bang> protocol_;
  PrefixCache prefix_;

  std::size_t pending_index_ = 0;
  Bang pending_value_ = Bang::none;
  std::size_t pending_anchor_ = 0;
  std::vector<std::size_t> trial_index_;
  std::vector<Vector> trial_states_;
  std::size_t trial_count_ = 0;
  Vector scratch_;
};

Vector evolve_continuous(const Vector& psi0, const JumpProtocol& protocol,
                         const ControlSpectra& spectra);

}  // namespace bangbang
