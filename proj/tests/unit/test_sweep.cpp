#include <bangbang/sweep.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <mutex>

using namespace bangbang;

namespace {

PipelineConfig cheap() {
  PipelineConfig c;
  c.n_max = 8;
  c.dbmc.anneal.moves_per_parameter = 5;
  c.dbmc.anneal.cooling_ratio = 1e-2;
  c.cbmc.anneal.moves_per_parameter = 10;
  c.cbmc.anneal.cooling_ratio = 1e-2;
  c.max_probes = 12;
  return c;
}

const SystemSpec kSystem{{2, Boundary::open}, 2};

// Cheap 2x2 sweep computed once and shared.
const SweepGrid& small_grid() {
  static const SweepGrid g = run_sweep(kSystem, GridAxis::uniform(-1.5, 1.5, 2), cheap(), {});
  return g;
}

struct MemoryStore {
  std::map<std::pair<std::size_t, std::size_t>, CellResult> cells;
  std::mutex m;
  SweepHooks hooks() {
    return {[this](std::size_t i, std::size_t j) -> std::optional<CellResult> {
              std::lock_guard lock(m);
              auto it = cells.find({i, j});
              if (it == cells.end()) return std::nullopt;
              return it->second;
            },
            [this](const CellResult& c) {
              std::lock_guard lock(m);
              cells[{c.i, c.j}] = c;
            }};
  }
};

}  // namespace

TEST(Axis, UniformAndValidation) {
  const GridAxis a = GridAxis::uniform(-2.2, 2.2, 21);
  ASSERT_EQ(a.size(), 21u);
  EXPECT_DOUBLE_EQ(a.ln_r.front(), -2.2);
  EXPECT_DOUBLE_EQ(a.ln_r.back(), 2.2);
  EXPECT_NEAR(a.ln_r[10], 0.0, 1e-15);
  EXPECT_EQ(GridAxis::uniform(0.3, 0.3, 1).ln_r, std::vector<double>{0.3});
  EXPECT_THROW(GridAxis::uniform(0.0, 1.0, 0), InvalidArgument);
  EXPECT_THROW((GridAxis{{0.0, 0.0}}.validate()), InvalidArgument);
  EXPECT_THROW((GridAxis{{1.0, 0.0}}.validate()), InvalidArgument);
  EXPECT_EQ(kSystem.label(), "M=4 C=2 open");
}

TEST(Sweep, CellSeedsAreDistinctAndStable) {
  EXPECT_EQ(cell_seed(1, 2, 3), Rng::mix_seed(1, 2, 3));
  EXPECT_NE(cell_seed(1, 2, 3), cell_seed(1, 3, 2));
}

TEST(Sweep, DiagonalIsSkipped) {
  const SweepGrid g = run_sweep(kSystem, GridAxis::uniform(0.5, 0.5, 1), cheap(), {});
  ASSERT_TRUE(g.at(0, 0).has_value());
  EXPECT_TRUE(g.at(0, 0)->skipped);
  EXPECT_FALSE(g.at(0, 0)->ok());
  EXPECT_NEAR(g.at(0, 0)->overlap, 1.0, 1e-12);
  EXPECT_EQ(g.ok_cell(0, 0), nullptr);
}

TEST(Sweep, SmallGridComputesOffDiagonal) {
  const SweepGrid& g = small_grid();
  EXPECT_TRUE(g.at(0, 0)->skipped);
  EXPECT_TRUE(g.at(1, 1)->skipped);
  for (auto [i, j] : {std::pair{0, 1}, std::pair{1, 0}}) {
    const CellResult* c = g.ok_cell(i, j);
    ASSERT_NE(c, nullptr);
    EXPECT_GT(c->tau_critical, 0.0);
    EXPECT_LE(c->ds, cheap().epsilon + 1e-12);
    EXPECT_FALSE(c->history.empty());
    EXPECT_EQ(c->seed, cell_seed(1, i, j));
    const PulseStats s = count_pulses(c->protocol);
    EXPECT_GE(s.p_j + s.p_k, c->p_j + c->p_k);
  }
}

TEST(Sweep, ResumeMatchesUninterrupted) {
  const GridAxis axis = GridAxis::uniform(-1.5, 1.5, 2);
  MemoryStore store;
  SweepOptions opts;
  opts.max_new_cells = 1;
  const SweepGrid partial = run_sweep(kSystem, axis, cheap(), opts, store.hooks());
  std::size_t present = 0;
  for (const auto& c : partial.cells) present += c.has_value();
  EXPECT_EQ(present, 1u);
  EXPECT_EQ(store.cells.size(), 1u);

  opts.max_new_cells.reset();
  opts.threads = 2;
  const SweepGrid resumed = run_sweep(kSystem, axis, cheap(), opts, store.hooks());
  EXPECT_EQ(store.cells.size(), 4u);
  EXPECT_EQ(resumed.cells, small_grid().cells);

  // A second resume computes nothing new.
  const auto before = store.cells;
  run_sweep(kSystem, axis, cheap(), opts, store.hooks());
  EXPECT_EQ(store.cells, before);
}

TEST(Overlap, SymmetricWithUnitDiagonal) {
  const XxzSystem sys(kSystem.lattice, kSystem.occupants);
  const GridAxis axis = GridAxis::uniform(-2.2, 2.2, 9);
  const OverlapGrid g = overlap_grid(sys, axis);
  for (Eigen::Index i = 0; i < 9; ++i) {
    EXPECT_NEAR(g.overlap(i, i), 1.0, 1e-12);
    for (Eigen::Index j = 0; j < 9; ++j) {
      EXPECT_NEAR(g.overlap(i, j), g.overlap(j, i), 1e-12);
      EXPECT_GE(g.overlap(i, j), 0.0);
      EXPECT_LE(g.overlap(i, j), 1.0 + 1e-12);
    }
  }
  EXPECT_EQ(count_skipped(g, 1.0 + 1e-9), 0u);
  EXPECT_EQ(count_skipped(g, -1.0), 72u);
}

TEST(Spearman, Basics) {
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {1, 8, 27}), 1.0);  // rank based
  EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 0.9486832980505138, 1e-12);
  EXPECT_TRUE(std::isnan(spearman({1, 1, 1}, {1, 2, 3})));
  EXPECT_THROW(spearman({1}, {1}), InvalidArgument);
  EXPECT_THROW(spearman({1, 2}, {1}), InvalidArgument);
}

TEST(TauRatio, IdenticalGridsAndMismatch) {
  const SweepGrid& g = small_grid();
  const TauRatio r = tau_ratio(g, g);
  EXPECT_EQ(r.cells, 2u);
  EXPECT_DOUBLE_EQ(r.mean_log, 0.0);
  EXPECT_DOUBLE_EQ(r.std_log, 0.0);
  EXPECT_TRUE(std::isnan(r.log_ratio(0, 0)));
  EXPECT_DOUBLE_EQ(r.log_ratio(0, 1), 0.0);

  SweepGrid other = g;
  other.axis.ln_r[1] = 1.4;
  EXPECT_THROW(tau_ratio(g, other), IncompatibleInputs);
  other = g;
  other.system.lattice.side_length = 3;
  EXPECT_THROW(tau_ratio(g, other), IncompatibleInputs);
  other = g;
  other.system.occupants = 1;  // same lattice, different filling is allowed
  EXPECT_NO_THROW(tau_ratio(g, other));
}

TEST(CorrelationMap, SelfIsFullAgreementAboveBackground) {
  const SweepGrid& g = small_grid();
  const Eigen::MatrixXd m = correlation_map(g, 0, 1, Control::j);
  const std::size_t s = 2 * g.ok_cell(0, 1)->protocol.j.jumps.size();
  EXPECT_DOUBLE_EQ(m(0, 1), 1.0 - correlation_background(s));
  EXPECT_TRUE(std::isnan(m(0, 0)));
  EXPECT_THROW(correlation_map(g, 0, 0, Control::j), InvalidArgument);
}

TEST(RowSpearman, NeedsThreeCells) {
  const auto rows = row_spearman(small_grid());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].has_value());
}
