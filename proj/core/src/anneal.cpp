#include "bangbang/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "bangbang/errors.hpp"

namespace bangbang {

int AnnealSchedule::stages_to_cool(double decay, double ratio) {
  if (!(decay > 0.0 && decay < 1.0)) throw InvalidArgument("decay must lie in (0, 1)");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("cooling ratio must lie in (0, 1)");
  int n = static_cast<int>(std::floor(std::log(ratio) / std::log(decay))) + 1;
  while (std::pow(decay, n - 1) < ratio) --n;  // guard against rounding
  return n;
}

AnnealSchedule AnnealSchedule::make(double t0, const AnnealOptions& options,
                                    std::size_t parameters) {
  AnnealSchedule s;
  s.t0 = t0;
  s.decay = options.decay;
  s.decay_stages = stages_to_cool(options.decay, options.cooling_ratio);
  s.frozen_stages = options.frozen_stages;
  const double moves = std::ceil(options.moves_per_parameter * static_cast<double>(parameters));
  s.moves_per_stage = std::max<std::size_t>(1, static_cast<std::size_t>(moves));
  s.validate();
  return s;
}

double AnnealSchedule::temperature(int stage) const {
  return stage < decay_stages ? t0 * std::pow(decay, stage) : 0.0;
}

double AnnealSchedule::relative(int stage) const {
  return stage < decay_stages ? std::pow(decay, stage) : 0.0;
}

void AnnealSchedule::validate() const {
  if (!(t0 > 0.0)) throw InvalidArgument("T0 must be positive");
  if (!(decay > 0.0 && decay < 1.0)) throw InvalidArgument("decay must lie in (0, 1)");
  if (moves_per_stage < 1) throw InvalidArgument("moves per stage must be >= 1");
  if (decay_stages < 0 || frozen_stages < 0) throw InvalidArgument("stage counts must be >= 0");
}

double MoveBound::at(double relative) const {
  return std::max(initial * relative, floor);
}

void MoveBound::validate() const {
  if (!(floor > 0.0 && floor < initial && initial <= 1.0))
    throw InvalidArgument("move bound needs 0 < floor < initial <= 1");
}

Calibration calibrate_t0(const std::function<double()>& sample_delta,
                         int sample_count, double target) {
  if (sample_count <= 0) throw InvalidArgument("calibration needs sample_count > 0");
  if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("target acceptance must lie in (0, 1)");
  std::vector<double> up;
  up.reserve(static_cast<std::size_t>(sample_count));
  for (int s = 0; s < sample_count; ++s) {
    const double d = sample_delta();
    if (d > 0.0) up.push_back(d);
  }
  Calibration c;
  c.increasing = up.size();
  if (up.empty()) {
    c.t0 = kMinTemperature;
    c.acceptance = 1.0;
    c.warning = true;
    return c;
  }
  auto mean_acceptance = [&](double t) {
    double sum = 0.0;
    for (double d : up) sum += std::exp(-d / t);
    return sum / static_cast<double>(up.size());
  };
  // Acceptance grows monotonically with T; bisect in log T.
  const double ref = *std::max_element(up.begin(), up.end());
  double lo = std::log(std::max(ref * 1e-6, kMinTemperature));
  double hi = std::log(ref * 1e6);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_acceptance(std::exp(mid)) < target ? lo : hi) = mid;
  }
  c.t0 = std::exp(0.5 * (lo + hi));
  c.acceptance = mean_acceptance(c.t0);
  return c;
}

bool metropolis_accept(double delta, double temperature, Rng& rng) {
  if (delta <= 0.0) return true;
  if (temperature <= 0.0) return false;
  return rng.uniform() < std::exp(-delta / temperature);
}

std::string format_trace(const TraceRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "stage=%s params=%zu step=%d T=%.9e best=%.12e tau=%.12e",
                r.stage.c_str(), r.parameters, r.step, r.temperature, r.best_cost, r.tau);
  return buf;
}

}  // namespace bangbang
