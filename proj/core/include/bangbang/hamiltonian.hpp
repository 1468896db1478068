#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "bangbang/errors.hpp"
#include "bangbang/lattice.hpp"

namespace bangbang {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct Couplings {
  double j = 0.0;
  double k = 0.0;
  bool operator==(const Couplings&) const = default;
};

// H(J, K) = sum_<ij> [J (sx sx + sy sy) + K sz sz] restricted to one
// magnetization sector. O_J = H(1, 0) and O_K = H(0, 1).
class SectorOperator {
 public:
  SectorOperator() = default;
  SectorOperator(Matrix matrix, Couplings couplings)
      : matrix_(std::move(matrix)), couplings_(couplings) {}

  const Matrix& matrix() const { return matrix_; }
  Couplings couplings() const { return couplings_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  std::string label() const;

 private:
  Matrix matrix_;
  Couplings couplings_;
};

SectorOperator build_operator(const SectorBasis& basis,
                              std::span<const Bond> bonds, Couplings couplings);

// Eigenvalues ascending; columns of `vectors` are the eigenvectors.
struct EigenDecomposition {
  Eigen::VectorXd values;
  Matrix vectors;
};

EigenDecomposition diagonalize(const SectorOperator& op);

// r = J / K. The normalized couplings sit on the boundary of [0, 1]^2.
struct CouplingRatio {
  double r = 1.0;

  static CouplingRatio from_log(double ln_r);
  Couplings normalized() const;
};

struct GroundState {
  Vector state;
  double energy = 0.0;
  double gap = 0.0;             // to the next eigenvalue in the sector
  double spectral_width = 0.0;  // max - min eigenvalue
};

// Relative gap below which a ground state is considered degenerate.
inline constexpr double kDegeneracyTolerance = 1e-8;

class DegenerateGroundState : public Error {
 public:
  DegenerateGroundState(const std::string& what, Vector first, Vector second)
      : Error(what), first_(std::move(first)), second_(std::move(second)) {}
  const Vector& first() const { return first_; }
  const Vector& second() const { return second_; }

 private:
  Vector first_;
  Vector second_;
};

// Lowest eigenvector of H at the normalized couplings of `ratio`, with the
// largest-magnitude amplitude made real and positive.
GroundState ground_state(const SectorBasis& basis, std::span<const Bond> bonds,
                         CouplingRatio ratio);
GroundState ground_state(const SectorOperator& op);

struct DistanceReport {
  double cost_energy = 0.0;  // <psi|H_target|psi>
  double cost_state = 0.0;   // 1 - |<psi|target>|^2
  double dist_energy = 0.0;
  double dist_state = 0.0;
};

double state_cost(const Vector& psi, const Vector& target);

// Normalized distances; 1 at the initial state and 0 at the target. Throws
// StatesCoincide when the initial state is (numerically) the target.
DistanceReport distances(const Vector& psi, const Vector& initial,
                         const Vector& target, const SectorOperator& h_target,
                         double e0);

// Lattice, sector and the two control operators of one XXZ system.
struct XxzSystem {
  LatticeSpec lattice;
  std::vector<Bond> bonds;
  SectorBasis basis;
  SectorOperator o_j;
  SectorOperator o_k;

  XxzSystem(const LatticeSpec& spec, int occupants,
            std::size_t max_dimension = kDefaultMaxDimension);

  SectorOperator hamiltonian(Couplings c) const;
  GroundState ground_state(CouplingRatio ratio) const;
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }
};

}  // namespace bangbang
