#include <bangbang/hamiltonian.hpp>
#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"

using namespace bangbang;

namespace {

std::vector<std::pair<int, int>> pairs(const std::vector<Bond>& bonds) {
  std::vector<std::pair<int, int>> out;
  for (const Bond& b : bonds) out.emplace_back(b.i, b.j);
  return out;
}

Vector random_state(Eigen::Index d, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(n(gen), n(gen));
  return v.normalized();
}

}  // namespace

TEST(Operator, SingleBondTwoByTwo) {
  const SectorBasis basis(2, 1);
  const std::vector<Bond> bonds{{0, 1}};
  const double j = 0.7, k = 0.3;
  const Matrix h = build_operator(basis, bonds, {j, k}).matrix();
  Matrix expected(2, 2);
  expected << -k, 2 * j, 2 * j, -k;
  EXPECT_LE((h - expected).cwiseAbs().maxCoeff(), 1e-15);
  const Matrix full = oracle::project(oracle::full_hamiltonian(2, {{0, 1}}, j, k), 2, 1);
  EXPECT_LE((h - full).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Operator, MatchesFullSpaceProjection) {
  const std::vector<std::vector<Bond>> graphs{
      build_lattice({2, Boundary::open}),
      build_lattice({2, Boundary::periodic, true}),
      {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}},
      {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {0, 3}, {1, 4}, {2, 5}},
  };
  for (const auto& bonds : graphs) {
    int sites = 0;
    for (const Bond& b : bonds) sites = std::max(sites, b.j + 1);
    for (int c = 0; c <= sites; ++c) {
      const SectorBasis basis(sites, c);
      for (auto [j, k] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {0.4, 1.3}}) {
        const Matrix h = build_operator(basis, bonds, {j, k}).matrix();
        const Matrix ref = oracle::project(oracle::full_hamiltonian(sites, pairs(bonds), j, k), sites, c);
        EXPECT_LE((h - ref).cwiseAbs().maxCoeff(), 1e-12) << "M=" << sites << " C=" << c;
      }
    }
  }
}

TEST(Operator, LinearInCouplings) {
  const XxzSystem sys({3, Boundary::open}, 3);
  const Matrix combo = 0.37 * sys.o_j.matrix() + 1.91 * sys.o_k.matrix();
  EXPECT_LE((sys.hamiltonian({0.37, 1.91}).matrix() - combo).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Operator, Hermitian) {
  const XxzSystem sys({3, Boundary::periodic}, 4);
  const Matrix h = sys.hamiltonian({0.8, 0.6}).matrix();
  EXPECT_LE((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Operator, BondsMustFitBasis) {
  const SectorBasis basis(4, 2);
  const std::vector<Bond> bonds{{0, 5}};
  EXPECT_THROW(build_operator(basis, bonds, {1, 1}), InvalidArgument);
}

TEST(Operator, Labels) {
  const XxzSystem sys({2, Boundary::open}, 2);
  EXPECT_EQ(sys.o_j.label(), "O_J");
  EXPECT_EQ(sys.o_k.label(), "O_K");
}

TEST(Diagonalize, TwoByTwo) {
  const SectorBasis basis(2, 1);
  const std::vector<Bond> bonds{{0, 1}};
  const EigenDecomposition e = diagonalize(build_operator(basis, bonds, {0.5, 0.25}));
  EXPECT_NEAR(e.values(0), -0.25 - 1.0, 1e-14);
  EXPECT_NEAR(e.values(1), -0.25 + 1.0, 1e-14);
}

TEST(Diagonalize, IdentityAndRandomReconstruction) {
  const EigenDecomposition id = diagonalize(SectorOperator(Matrix::Identity(5, 5), {}));
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(id.values(i), 1.0, 1e-14);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n;
  Matrix a(20, 20);
  for (Eigen::Index r = 0; r < 20; ++r)
    for (Eigen::Index c = 0; c < 20; ++c) a(r, c) = Complex(n(gen), n(gen));
  const Matrix h = a + a.adjoint();
  const EigenDecomposition e = diagonalize(SectorOperator(h, {}));
  const Matrix back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  EXPECT_LE((back - h).cwiseAbs().maxCoeff(), 1e-9 * h.cwiseAbs().maxCoeff());
  const Matrix gram = e.vectors.adjoint() * e.vectors;
  EXPECT_LE((gram - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index i = 1; i < 20; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
}

TEST(CouplingRatio, Normalization) {
  EXPECT_EQ(CouplingRatio{0.5}.normalized(), (Couplings{0.5, 1.0}));
  EXPECT_EQ(CouplingRatio{1.0}.normalized(), (Couplings{1.0, 1.0}));
  EXPECT_EQ(CouplingRatio{4.0}.normalized(), (Couplings{1.0, 0.25}));
  EXPECT_NEAR(CouplingRatio::from_log(std::log(3.0)).r, 3.0, 1e-14);
  EXPECT_THROW(CouplingRatio{0.0}.normalized(), InvalidArgument);
}

TEST(GroundState, DeterministicAndNormalized) {
  const XxzSystem sys({3, Boundary::open}, 2);
  const GroundState a = sys.ground_state(CouplingRatio::from_log(0.7));
  const GroundState b = sys.ground_state(CouplingRatio::from_log(0.7));
  EXPECT_NEAR(a.state.norm(), 1.0, 1e-12);
  EXPECT_NEAR(std::norm(a.state.dot(b.state)), 1.0, 1e-12);
  EXPECT_GT(a.gap, 0.0);
  EXPECT_NEAR((sys.hamiltonian(CouplingRatio::from_log(0.7).normalized()).matrix() * a.state - a.energy * a.state).norm(),
              0.0, 1e-10);
}

TEST(GroundState, PhaseConvention) {
  const XxzSystem sys({3, Boundary::open}, 2);
  const GroundState g = sys.ground_state(CouplingRatio::from_log(-0.4));
  Eigen::Index arg = 0;
  g.state.cwiseAbs().maxCoeff(&arg);
  EXPECT_NEAR(g.state(arg).imag(), 0.0, 1e-15);
  EXPECT_GT(g.state(arg).real(), 0.0);
}

TEST(GroundState, ParticleHoleEnergies) {
  const XxzSystem a({3, Boundary::open}, 2), b({3, Boundary::open}, 7);
  for (double lr : {-1.2, 0.3, 1.8})
    EXPECT_NEAR(a.ground_state(CouplingRatio::from_log(lr)).energy,
                b.ground_state(CouplingRatio::from_log(lr)).energy, 1e-10);
}

TEST(GroundState, ScaleIndependent) {
  const XxzSystem sys({2, Boundary::open}, 2);
  const GroundState a = ground_state(sys.hamiltonian({0.3, 1.0}));
  const GroundState b = ground_state(sys.hamiltonian({0.6, 2.0}));
  EXPECT_NEAR(std::norm(a.state.dot(b.state)), 1.0, 1e-12);
}

TEST(GroundState, SectorEnergyAboveFullSpace) {
  const std::vector<Bond> bonds = build_lattice({2, Boundary::open});
  const Matrix full = oracle::full_hamiltonian(4, pairs(bonds), 0.5, 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(full);
  const double global = es.eigenvalues()(0);
  double best = 1e300;
  for (int c = 0; c <= 4; ++c) {
    const SectorBasis basis(4, c);
    const SectorOperator h = build_operator(basis, bonds, {0.5, 1.0});
    try {
      const double e = ground_state(h).energy;
      EXPECT_GE(e, global - 1e-10);
      best = std::min(best, e);
    } catch (const DegenerateGroundState& d) {
      best = std::min(best, diagonalize(h).values(0));
    }
  }
  EXPECT_NEAR(best, global, 1e-10);
}

TEST(GroundState, DegenerateIsReported) {
  // Two decoupled bonds: the Ising-only ground state of one C = 2 sector is
  // degenerate.
  const SectorBasis basis(4, 2);
  const std::vector<Bond> bonds{{0, 1}, {2, 3}};
  try {
    ground_state(build_operator(basis, bonds, {0.0, 1.0}));
    FAIL() << "expected DegenerateGroundState";
  } catch (const DegenerateGroundState& e) {
    EXPECT_NEAR(e.first().norm(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(e.first().dot(e.second())), 0.0, 1e-10);
  }
}

TEST(Distances, Endpoints) {
  const XxzSystem sys({2, Boundary::open}, 2);
  const GroundState gi = sys.ground_state(CouplingRatio::from_log(-1.5));
  const GroundState gt = sys.ground_state(CouplingRatio::from_log(1.5));
  const SectorOperator ht = sys.hamiltonian(CouplingRatio::from_log(1.5).normalized());
  const DistanceReport at_target = distances(gt.state, gi.state, gt.state, ht, gt.energy);
  EXPECT_NEAR(at_target.cost_state, 0.0, 1e-14);
  EXPECT_NEAR(at_target.dist_state, 0.0, 1e-13);
  EXPECT_NEAR(at_target.cost_energy, gt.energy, 1e-12);
  const DistanceReport at_init = distances(gi.state, gi.state, gt.state, ht, gt.energy);
  EXPECT_NEAR(at_init.dist_state, 1.0, 1e-13);
  EXPECT_NEAR(at_init.dist_energy, 1.0, 1e-13);
}

TEST(Distances, StateDistanceTwoWays) {
  const XxzSystem sys({2, Boundary::open}, 2);
  const GroundState gi = sys.ground_state(CouplingRatio::from_log(-1.0));
  const GroundState gt = sys.ground_state(CouplingRatio::from_log(1.0));
  const SectorOperator ht = sys.hamiltonian(CouplingRatio::from_log(1.0).normalized());
  std::mt19937_64 gen(11);
  for (int n = 0; n < 20; ++n) {
    const Vector psi = random_state(6, gen);
    const DistanceReport r = distances(psi, gi.state, gt.state, ht, gt.energy);
    const double direct = (1.0 - std::norm(gt.state.dot(psi))) / (1.0 - std::norm(gt.state.dot(gi.state)));
    EXPECT_NEAR(r.dist_state, direct, 1e-12);
    EXPECT_NEAR(r.dist_state, r.cost_state / state_cost(gi.state, gt.state), 1e-12);
  }
}

TEST(Distances, Errors) {
  const XxzSystem sys({2, Boundary::open}, 2);
  const GroundState g = sys.ground_state(CouplingRatio::from_log(0.5));
  const SectorOperator h = sys.hamiltonian(CouplingRatio::from_log(0.5).normalized());
  EXPECT_THROW(distances(g.state, g.state, g.state, h, g.energy), StatesCoincide);
  EXPECT_THROW(distances(2.0 * g.state, g.state, g.state, h, g.energy), InvalidArgument);
}

TEST(System, Dimensions) {
  EXPECT_EQ(XxzSystem({2, Boundary::open}, 2).dim(), 6);
  EXPECT_EQ(XxzSystem({3, Boundary::open}, 2).dim(), 36);
  EXPECT_EQ(XxzSystem({3, Boundary::open}, 4).dim(), 126);
}
