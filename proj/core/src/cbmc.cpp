#include <algorithm>
#include <cmath>

#include "bangbang/optimizer.hpp"

namespace bangbang {

namespace {

// Jump `which` counts through J's list first, then K's.
std::vector<double>& jump_list(JumpProtocol& p, std::size_t which, std::size_t& slot) {
  if (which < p.j.jumps.size()) {
    slot = which;
    return p.j.jumps;
  }
  slot = which - p.j.jumps.size();
  return p.k.jumps;
}

bool has_idle_segment(const JumpProtocol& p) {
  for (const Segment& s : segments(p))
    if (s.bang == Bang::none && s.length > 0.0) return true;
  return false;
}

// Shifts one jump; returns false when ordering or the no-idle rule breaks.
bool shifted(JumpProtocol& p, std::size_t which, double shift) {
  std::size_t slot = 0;
  std::vector<double>& list = jump_list(p, which, slot);
  const double lo = slot == 0 ? 0.0 : list[slot - 1];
  const double hi = slot + 1 == list.size() ? p.tau : list[slot + 1];
  const double t = list[slot] + shift;
  if (!(t > lo && t < hi)) return false;
  list[slot] = t;
  return !has_idle_segment(p);
}

}  // namespace

CbmcResult cbmc(const Objective& objective, const ControlSpectra& spectra,
                const JumpProtocol& initial, const CbmcOptions& options,
                Rng& rng, const TraceSink& sink) {
  initial.validate();
  options.bound.validate();
  auto evaluate = [&](const JumpProtocol& p) {
    return objective(evolve_continuous(objective.initial(), p, spectra));
  };

  CbmcResult result;
  result.protocol = initial;
  result.initial_cost = evaluate(initial);
  result.cost = result.initial_cost;
  const std::size_t jumps = initial.jump_count();
  if (jumps == 0) return result;

  const double tau = initial.tau;
  JumpProtocol current = initial;
  double cost = result.initial_cost;

  const Calibration cal = calibrate_t0(
      [&] {
        JumpProtocol trial = current;
        const double shift = rng.sign() * rng.uniform() * options.bound.initial * tau;
        if (!shifted(trial, rng.index(jumps), shift)) return 0.0;
        return evaluate(trial) - cost;
      },
      options.anneal.calibration_samples, options.anneal.target_acceptance);
  const AnnealSchedule schedule = AnnealSchedule::make(cal.t0, options.anneal, jumps);
  result.t0 = cal.t0;

  JumpProtocol trial;
  for (int stage = 0; stage < schedule.total_stages(); ++stage) {
    const double temperature = schedule.temperature(stage);
    const double bound = options.bound.at(schedule.relative(stage)) * tau;
    const bool frozen = stage >= schedule.decay_stages;
    for (std::size_t m = 0; m < schedule.moves_per_stage; ++m) {
      trial = current;
      const double shift = rng.sign() * rng.uniform() * bound;
      if (!shifted(trial, rng.index(jumps), shift)) continue;
      const double c = evaluate(trial);
      if (!metropolis_accept(c - cost, temperature, rng)) continue;
      std::swap(current, trial);
      cost = c;
      if (frozen) result.largest_frozen_shift = std::max(result.largest_frozen_shift, std::abs(shift));
      if (cost < result.cost) {
        result.cost = cost;
        result.protocol = current;
      }
    }
    result.trace.push_back({result.cost, temperature});
    if (sink) sink({"cbmc", jumps, stage, temperature, result.cost, tau});
  }
  return result;
}

}  // namespace bangbang
