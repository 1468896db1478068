#include "bangbang/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bangbang {

namespace {

constexpr double kCoincideTolerance = 1e-12;

}  // namespace

std::string SectorOperator::label() const {
  if (couplings_ == Couplings{1.0, 0.0}) return "O_J";
  if (couplings_ == Couplings{0.0, 1.0}) return "O_K";
  std::ostringstream os;
  os.precision(17);
  os << "H(J=" << couplings_.j << ",K=" << couplings_.k << ")";
  return os.str();
}

SectorOperator build_operator(const SectorBasis& basis,
                              std::span<const Bond> bonds,
                              Couplings couplings) {
  for (const Bond& b : bonds) {
    if (b.i < 0 || b.j < 0 || b.i >= basis.sites() || b.j >= basis.sites() ||
        b.i == b.j) {
      throw InvalidArgument("bond (" + std::to_string(b.i) + "," +
                            std::to_string(b.j) +
                            ") does not fit the basis site count " +
                            std::to_string(basis.sites()));
    }
  }
  const auto d = static_cast<Eigen::Index>(basis.size());
  Matrix h = Matrix::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const Config s = basis.state(static_cast<std::size_t>(a));
    double diag = 0.0;
    for (const Bond& b : bonds) {
      const bool same = ((s >> b.i) & 1U) == ((s >> b.j) & 1U);
      diag += same ? couplings.k : -couplings.k;
      if (auto t = hop(s, b.i, b.j); t && couplings.j != 0.0) {
        // sx sx + sy sy = 2 (s+ s- + s- s+): amplitude 2J per hop.
        h(static_cast<Eigen::Index>(basis.rank(*t)), a) += 2.0 * couplings.j;
      }
    }
    h(a, a) = diag;
  }
  return SectorOperator(std::move(h), couplings);
}

EigenDecomposition diagonalize(const SectorOperator& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(op.matrix());
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eigensolver failed for " + op.label());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

CouplingRatio CouplingRatio::from_log(double ln_r) {
  return CouplingRatio{std::exp(ln_r)};
}

Couplings CouplingRatio::normalized() const {
  if (!(r > 0.0) || !std::isfinite(r))
    throw InvalidArgument("coupling ratio r must be positive and finite");
  return r <= 1.0 ? Couplings{r, 1.0} : Couplings{1.0, 1.0 / r};
}

GroundState ground_state(const SectorOperator& op) {
  const EigenDecomposition eig = diagonalize(op);
  const Eigen::Index d = eig.values.size();
  GroundState gs;
  gs.energy = eig.values(0);
  gs.spectral_width = eig.values(d - 1) - eig.values(0);
  gs.gap = d > 1 ? eig.values(1) - eig.values(0)
                 : std::numeric_limits<double>::infinity();
  Vector v = eig.vectors.col(0);
  if (d > 1 && gs.gap < kDegeneracyTolerance * gs.spectral_width) {
    throw DegenerateGroundState(
        "degenerate ground state for " + op.label() + " (gap " +
            std::to_string(gs.gap) + ")",
        v, eig.vectors.col(1));
  }
  // Phase convention: first amplitude of maximal modulus is real positive.
  const double vmax = v.cwiseAbs().maxCoeff();
  Eigen::Index pivot = 0;
  while (std::abs(v(pivot)) < vmax * (1.0 - 1e-9)) ++pivot;
  v *= std::conj(v(pivot)) / std::abs(v(pivot));
  v.normalize();
  gs.state = std::move(v);
  return gs;
}

GroundState ground_state(const SectorBasis& basis, std::span<const Bond> bonds,
                         CouplingRatio ratio) {
  return ground_state(build_operator(basis, bonds, ratio.normalized()));
}

double state_cost(const Vector& psi, const Vector& target) {
  return 1.0 - std::norm(target.dot(psi));
}

DistanceReport distances(const Vector& psi, const Vector& initial,
                         const Vector& target, const SectorOperator& h_target,
                         double e0) {
  for (const Vector* v : {&psi, &initial, &target}) {
    if (std::abs(v->norm() - 1.0) > 1e-10)
      throw InvalidArgument("distances: state is not normalized");
  }
  const Matrix& h = h_target.matrix();
  const double cs_init = state_cost(initial, target);
  const double ce_init = initial.dot(h * initial).real();
  const double scale = std::max(1.0, std::abs(e0));
  if (cs_init < kCoincideTolerance || ce_init - e0 < kCoincideTolerance * scale)
    throw StatesCoincide("initial and target states coincide");

  DistanceReport r;
  r.cost_energy = psi.dot(h * psi).real();
  r.cost_state = state_cost(psi, target);
  r.dist_energy = (r.cost_energy - e0) / (ce_init - e0);
  r.dist_state = r.cost_state / cs_init;
  return r;
}

XxzSystem::XxzSystem(const LatticeSpec& spec, int occupants,
                     std::size_t max_dimension)
    : lattice(spec),
      bonds(build_lattice(spec)),
      basis(spec.sites(), occupants, max_dimension),
      o_j(build_operator(basis, bonds, {1.0, 0.0})),
      o_k(build_operator(basis, bonds, {0.0, 1.0})) {}

SectorOperator XxzSystem::hamiltonian(Couplings c) const {
  return SectorOperator(c.j * o_j.matrix() + c.k * o_k.matrix(), c);
}

GroundState XxzSystem::ground_state(CouplingRatio ratio) const {
  return bangbang::ground_state(hamiltonian(ratio.normalized()));
}

}  // namespace bangbang
