#include <bangbang/optimizer.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace bangbang;

namespace {

struct Problem {
  XxzSystem system{{2, Boundary::open}, 2};
  ControlSpectra spectra{system};
  GroundState initial = system.ground_state(CouplingRatio::from_log(-1.5));
  GroundState target = system.ground_state(CouplingRatio::from_log(1.5));
  Objective objective = Objective::state_distance(initial.state, target.state);
};

const Problem& problem() {
  static const Problem p;
  return p;
}

AnnealOptions quick(double moves) {
  AnnealOptions a;
  a.moves_per_parameter = moves;
  a.cooling_ratio = 1e-2;
  a.calibration_samples = 50;
  return a;
}

double brute_force_min(const Objective& objective, const UnitaryCache& cache, std::size_t n) {
  std::vector<Bang> p(n);
  double best = std::numeric_limits<double>::infinity();
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t k = 0; k < n; ++k, c /= 3) p[k] = kActiveBangs[c % 3];
    best = std::min(best, objective(evolve_discrete(objective.initial(), p, cache)));
  }
  return best;
}

}  // namespace

TEST(Objective, Endpoints) {
  const Problem& pr = problem();
  EXPECT_NEAR(pr.objective(pr.initial.state), 1.0, 1e-12);
  EXPECT_NEAR(pr.objective(pr.target.state), 0.0, 1e-12);
  EXPECT_EQ(pr.objective.kind(), CostKind::state);
  EXPECT_THROW(Objective::state_distance(pr.target.state, pr.target.state), StatesCoincide);

  const SectorOperator h = pr.system.hamiltonian(CouplingRatio::from_log(1.5).normalized());
  const Objective e = Objective::energy_distance(pr.initial.state, pr.target.state, h, pr.target.energy);
  EXPECT_EQ(e.kind(), CostKind::energy);
  EXPECT_NEAR(e(pr.initial.state), 1.0, 1e-12);
  EXPECT_NEAR(e(pr.target.state), 0.0, 1e-12);
  EXPECT_NEAR(e.state_distance(pr.initial.state), 1.0, 1e-12);
}

TEST(Objective, PhaseInvariant) {
  const Problem& pr = problem();
  const Vector rotated = pr.initial.state * std::polar(1.0, 0.7);
  EXPECT_NEAR(pr.objective(rotated), 1.0, 1e-12);
}

TEST(Dbmc, FindsBruteForceOptimumOnFourIntervals) {
  const Problem& pr = problem();
  const UnitaryCache cache(pr.spectra, 0.25, 4, 4);
  const double best = brute_force_min(pr.objective, cache, 4);
  for (std::uint64_t seed : {1, 2, 3}) {
    Rng rng(seed);
    const DbmcResult r = dbmc(pr.objective, cache, DbmcOptions{}, rng);
    EXPECT_NEAR(r.cost, best, 1e-12) << "seed " << seed;
    ASSERT_EQ(r.rungs.size(), 1u);
  }
}

TEST(Dbmc, LadderIsMonotoneAndDiscrete) {
  const Problem& pr = problem();
  const UnitaryCache cache(pr.spectra, 0.25, 4, 32);
  DbmcOptions opt;
  opt.anneal = quick(10);
  Rng rng(5);
  std::vector<std::size_t> seen;
  const DbmcResult r = dbmc(pr.objective, cache, opt, rng, {},
                            [&](const TraceRecord& t) {
                              if (seen.empty() || seen.back() != t.parameters) seen.push_back(t.parameters);
                            });
  ASSERT_EQ(r.rungs.size(), 4u);
  EXPECT_EQ(seen, (std::vector<std::size_t>{4, 8, 16, 32}));
  for (std::size_t k = 0; k < r.rungs.size(); ++k) {
    EXPECT_EQ(r.rungs[k].intervals, 4u << k);
    EXPECT_LE(r.rungs[k].best_cost, r.rungs[k].initial_cost + 1e-12);
    if (k > 0) EXPECT_NEAR(r.rungs[k].initial_cost, r.rungs[k - 1].best_cost, 1e-10);
  }
  EXPECT_TRUE(r.protocol.is_discrete());
  EXPECT_EQ(r.protocol.intervals(), 32u);
  for (Bang b : to_bangs(r.protocol)) EXPECT_NE(b, Bang::none);
  EXPECT_NEAR(r.cost, pr.objective(evolve_discrete(pr.objective.initial(), to_bangs(r.protocol), cache)), 1e-12);
}

TEST(Dbmc, DeterministicForSeed) {
  const Problem& pr = problem();
  const UnitaryCache cache(pr.spectra, 0.3, 4, 16);
  DbmcOptions opt;
  opt.anneal = quick(5);
  Rng a(11), b(11);
  const DbmcResult ra = dbmc(pr.objective, cache, opt, a);
  const DbmcResult rb = dbmc(pr.objective, cache, opt, b);
  EXPECT_EQ(to_bangs(ra.protocol), to_bangs(rb.protocol));
  EXPECT_EQ(ra.cost, rb.cost);
}

TEST(Dbmc, RejectsBadInitial) {
  const Problem& pr = problem();
  const UnitaryCache cache(pr.spectra, 0.3, 4, 16);
  Rng rng(1);
  PiecewiseProtocol bad{0.3, std::vector<Amplitudes>(6, {1.0, 1.0})};
  EXPECT_THROW(dbmc(pr.objective, cache, DbmcOptions{}, rng, bad), InvalidArgument);
}

TEST(Cbmc, ImprovesAndRespectsFloor) {
  const Problem& pr = problem();
  JumpProtocol start{0.3, {true, {0.1, 0.2}}, {false, {0.05, 0.25}}};
  CbmcOptions opt;
  opt.anneal = quick(20);
  Rng rng(2);
  const CbmcResult r = cbmc(pr.objective, pr.spectra, start, opt, rng);
  EXPECT_LE(r.cost, r.initial_cost);
  EXPECT_EQ(r.protocol.jump_count(), start.jump_count());
  EXPECT_EQ(r.protocol.j.initial_on, true);
  EXPECT_EQ(r.protocol.k.initial_on, false);
  r.protocol.validate();
  EXPECT_LE(r.largest_frozen_shift, opt.bound.floor * start.tau + 1e-15);
  for (std::size_t s = 1; s < r.trace.size(); ++s) EXPECT_LE(r.trace[s].cost, r.trace[s - 1].cost);
  for (const Segment& s : segments(r.protocol)) EXPECT_NE(s.bang, Bang::none);
  EXPECT_NEAR(r.cost, pr.objective(evolve_continuous(pr.objective.initial(), r.protocol, pr.spectra)), 1e-12);
}

TEST(Cbmc, NoJumpsIsIdentity) {
  const Problem& pr = problem();
  const JumpProtocol start{0.3, {true, {}}, {true, {}}};
  Rng rng(2);
  const CbmcResult r = cbmc(pr.objective, pr.spectra, start, CbmcOptions{}, rng);
  EXPECT_EQ(r.protocol, start);
  EXPECT_EQ(r.cost, r.initial_cost);
}

TEST(Bfmc, ValuesStayInUnitSquare) {
  const Problem& pr = problem();
  BfmcOptions opt;
  opt.anneal = quick(10);
  Rng rng(3);
  const PiecewiseProtocol init{0.3, std::vector<Amplitudes>(8, {0.5, 0.5})};
  const BfmcResult r = bfmc(pr.objective, pr.spectra, 0.3, 8, opt, rng, init);
  ASSERT_EQ(r.protocol.intervals(), 8u);
  for (const Amplitudes& a : r.protocol.values) {
    EXPECT_GE(a.j, 0.0);
    EXPECT_LE(a.j, 1.0);
    EXPECT_GE(a.k, 0.0);
    EXPECT_LE(a.k, 1.0);
  }
  for (std::size_t s = 1; s < r.trace.size(); ++s) EXPECT_LE(r.trace[s].cost, r.trace[s - 1].cost);
  EXPECT_GE(r.cost, 0.0);
  EXPECT_LE(r.cost, 1.0 + 1e-12);
  EXPECT_THROW(bfmc(pr.objective, pr.spectra, 0.3, 0, opt, rng), InvalidArgument);
}

TEST(Bfmc, RejectsBadMoveFloor) {
  const Problem& pr = problem();
  BfmcOptions opt;
  opt.min_move = 1.5;
  Rng rng(1);
  EXPECT_THROW(bfmc(pr.objective, pr.spectra, 0.3, 4, opt, rng), InvalidArgument);
}

// Below the critical time the continuous optimum saturates the bounds and
// matches the discrete optimum on the same grid.
TEST(Bfmc, CollapsesToBangBangBelowCriticalTime) {
  const Problem& pr = problem();
  const double tau = 0.2;
  Rng drng(1);
  UnitaryCache cache(pr.spectra, tau, 4, 16);
  const DbmcResult d = dbmc(pr.objective, cache, DbmcOptions{}, drng);
  Rng rng(2);
  const BfmcResult r = bfmc(pr.objective, pr.spectra, tau, 16, BfmcOptions{}, rng);
  EXPECT_LE(r.cost, d.cost + 1e-3);
  // A switch falling inside an interval may leave that one interval fractional.
  int interior_j = 0, interior_k = 0;
  for (const Amplitudes& a : r.protocol.values) {
    interior_j += std::min(a.j, 1.0 - a.j) > 0.05;
    interior_k += std::min(a.k, 1.0 - a.k) > 0.05;
  }
  EXPECT_LE(interior_j, 1);
  EXPECT_LE(interior_k, 1);
}

TEST(Pipeline, ConfigValidation) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_min = 3;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.epsilon_tol = 0.05;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.n_max = 2;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Pipeline, BbmcDeterministic) {
  const Problem& pr = problem();
  PipelineConfig cfg;
  cfg.n_max = 16;
  cfg.dbmc.anneal = quick(5);
  cfg.cbmc.anneal = quick(20);
  Rng a(4), b(4);
  const BbmcResult ra = bbmc(pr.objective, pr.spectra, 0.3, cfg, a);
  const BbmcResult rb = bbmc(pr.objective, pr.spectra, 0.3, cfg, b);
  EXPECT_EQ(ra.protocol, rb.protocol);
  EXPECT_EQ(ra.ds, rb.ds);
  EXPECT_LE(ra.cost, ra.dbmc_cost + 1e-12);
}

TEST(Pipeline, TauSearchLandsInBand) {
  const Problem& pr = problem();
  PipelineConfig cfg;
  cfg.n_max = 16;
  cfg.dbmc.anneal = quick(10);
  cfg.cbmc.anneal = quick(40);
  Rng rng(1);
  const TauSearchResult r = find_tau_critical(pr.objective, pr.spectra, cfg, rng);
  ASSERT_TRUE(r.tolerance_met);
  EXPECT_LE(r.ds, cfg.epsilon);
  EXPECT_GE(r.ds, cfg.epsilon - cfg.epsilon_tol);
  EXPECT_NEAR(r.protocol.tau, r.tau_critical, 1e-12);
  ASSERT_FALSE(r.history.empty());
  EXPECT_LE(r.history.size(), static_cast<std::size_t>(cfg.max_probes));
  // Every probe shorter than the answer must miss the threshold.
  for (const TauProbe& p : r.history)
    if (p.tau < r.tau_critical) EXPECT_GT(p.ds, cfg.epsilon);
  EXPECT_GT(r.tau_extrapolated, r.tau_critical);
}

TEST(Extrapolation, RecoversQuadraticRoot) {
  const double tau0 = 0.7;
  auto ds = [&](double t) { return 0.9 * (tau0 - t) + 0.6 * (tau0 - t) * (tau0 - t); };
  std::vector<TauProbe> h;
  for (double t : {0.2, 0.45, 0.55, 0.6, 0.65}) h.push_back({t, ds(t), SearchPhase::scaling, {}});
  h.push_back({0.8, 0.0, SearchPhase::scaling, {}});  // saturated probe is ignored
  EXPECT_NEAR(extrapolate_exact_time(h), tau0, 1e-9);
}

TEST(Extrapolation, SingleProbeFallsBackToLine) {
  const std::vector<TauProbe> h{{0.5, 0.5, SearchPhase::extrapolating, {}}};
  EXPECT_NEAR(extrapolate_exact_time(h), 1.0, 1e-12);
  EXPECT_THROW(extrapolate_exact_time({}), InvalidArgument);
}

TEST(Baseline, Limits) {
  const Problem& pr = problem();
  const auto ri = CouplingRatio::from_log(-1.5), rt = CouplingRatio::from_log(1.5);
  const BaselineResult zero = adiabatic_baseline(pr.system, pr.initial.state, pr.target.state, ri, rt, 0.0, 4);
  EXPECT_NEAR(zero.ds, 1.0, 1e-12);
  const BaselineResult slow = adiabatic_baseline(pr.system, pr.initial.state, pr.target.state, ri, rt, 200.0, 64);
  EXPECT_LT(slow.ds, 0.05);
  EXPECT_GE(slow.steps, 64u);
  EXPECT_THROW(adiabatic_baseline(pr.system, pr.target.state, pr.target.state, ri, rt, 1.0, 4), StatesCoincide);
}
