#include <algorithm>

#include "bangbang/optimizer.hpp"

namespace bangbang {

namespace {

std::vector<Bang> random_bangs(std::size_t n, Rng& rng) {
  std::vector<Bang> out(n);
  for (Bang& b : out) b = kActiveBangs[rng.index(kActiveBangs.size())];
  return out;
}

std::vector<Bang> doubled(const std::vector<Bang>& bangs) {
  std::vector<Bang> out;
  out.reserve(bangs.size() * 2);
  for (Bang b : bangs) {
    out.push_back(b);
    out.push_back(b);
  }
  return out;
}

// Interior of a plateau: both neighbours (where present) equal the interval.
bool on_plateau(const std::vector<Bang>& p, std::size_t i) {
  const bool left = i == 0 || p[i - 1] == p[i];
  const bool right = i + 1 == p.size() || p[i + 1] == p[i];
  return left && right;
}

}  // namespace

DbmcResult dbmc(const Objective& objective, const UnitaryCache& cache,
                const DbmcOptions& options, Rng& rng,
                const std::optional<PiecewiseProtocol>& initial,
                const TraceSink& sink) {
  std::vector<Bang> current;
  if (initial) {
    if (!cache.has(initial->intervals()))
      throw InvalidArgument("initial protocol interval count is not on the cache ladder");
    current = to_bangs(*initial);
    for (Bang b : current)
      if (b == Bang::none) throw InvalidArgument("initial protocol has a (0,0) interval");
  } else {
    current = random_bangs(cache.n_min(), rng);
  }

  DbmcResult result;
  std::vector<Bang> best_bangs;
  for (std::size_t n = current.size(); n <= cache.n_max(); n *= 2) {
    if (!best_bangs.empty()) current = doubled(best_bangs);
    IncrementalEvolver evolver(cache, objective.initial(), current);
    double cost = objective(evolver.final_state());
    DbmcRung rung{n, cost, cost, 0.0};
    double best = cost;
    best_bangs = current;

    auto pick = [&] {
      std::size_t idx = rng.index(n);
      if (options.reroll && on_plateau(evolver.protocol(), idx)) idx = rng.index(n);
      return idx;
    };
    auto flipped = [&](std::size_t idx) {
      const Bang b = evolver.protocol()[idx];
      return rng.coin() ? flip_j(b) : flip_k(b);
    };

    Calibration cal = calibrate_t0(
        [&] {
          const std::size_t idx = rng.index(n);
          const Bang b = flipped(idx);
          if (b == Bang::none) return 0.0;
          return objective(evolver.propose(idx, b)) - cost;
        },
        options.anneal.calibration_samples, options.anneal.target_acceptance);
    double t0 = cal.t0;
    if (n != cache.n_min() || initial) t0 *= options.refine_temperature_scale;
    t0 = std::max(t0, kMinTemperature);
    const AnnealSchedule schedule = AnnealSchedule::make(t0, options.anneal, n);
    rung.t0 = t0;

    for (int stage = 0; stage < schedule.total_stages(); ++stage) {
      const double temperature = schedule.temperature(stage);
      for (std::size_t m = 0; m < schedule.moves_per_stage; ++m) {
        const std::size_t idx = pick();
        const Bang b = flipped(idx);
        if (b == Bang::none) continue;  // both controls off is never allowed
        const double trial = objective(evolver.propose(idx, b));
        if (!metropolis_accept(trial - cost, temperature, rng)) continue;
        evolver.accept();
        cost = trial;
        if (cost < best) {
          best = cost;
          best_bangs = evolver.protocol();
        }
      }
      if (sink) sink({"dbmc", n, stage, temperature, best, cache.tau()});
    }
    // Score the rung's best from scratch so the reported value does not
    // depend on the incremental evaluation order.
    rung.best_cost = objective(evolve_discrete(objective.initial(), best_bangs, cache));
    result.rungs.push_back(rung);
  }
  result.protocol = from_bangs(cache.tau(), best_bangs);
  result.cost = result.rungs.back().best_cost;
  return result;
}

}  // namespace bangbang
