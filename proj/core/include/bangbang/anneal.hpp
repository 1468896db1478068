#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "bangbang/rng.hpp"

namespace bangbang {

// Knobs shared by the three annealing stages.
struct AnnealOptions {
  double decay = 0.95;           // T <- decay * T per stage
  double cooling_ratio = 1e-3;   // decay stages run until T < ratio * T0
  int frozen_stages = 10;        // extra stages at T = 0
  double moves_per_parameter = 50.0;
  int calibration_samples = 200;
  double target_acceptance = 0.85;
};

// Multiplicative cooling: T_s = T0 decay^s for the first `decay_stages`
// stages, then `frozen_stages` stages at T = 0.
struct AnnealSchedule {
  double t0 = 1.0;
  double decay = 0.95;
  int decay_stages = 0;
  int frozen_stages = 0;
  std::size_t moves_per_stage = 1;

  // Smallest N with decay^N < ratio.
  static int stages_to_cool(double decay, double ratio);
  static AnnealSchedule make(double t0, const AnnealOptions& options,
                             std::size_t parameters);

  int total_stages() const { return decay_stages + frozen_stages; }
  double temperature(int stage) const;
  // T / T0 for the stage; frozen stages report 0.
  double relative(int stage) const;
  void validate() const;
};

// Temperature-dependent bound on continuous moves, as a fraction of tau.
struct MoveBound {
  double initial = 0.8;
  double floor = 0.02;

  // max(initial * T/T0, floor); relative = 0 during frozen stages.
  double at(double relative) const;
  void validate() const;
};

struct Calibration {
  double t0 = 0.0;
  double acceptance = 0.0;  // mean exp(-dC / T0) over cost-increasing samples
  std::size_t increasing = 0;
  bool warning = false;     // no sampled move increased the cost
};

inline constexpr double kMinTemperature = 1e-12;

// Picks T0 so that cost-increasing moves drawn from `sample_delta` are
// accepted with mean probability `target` (0.85 by default).
Calibration calibrate_t0(const std::function<double()>& sample_delta,
                         int sample_count, double target = 0.85);

// Metropolis rule: always accept dC <= 0, otherwise with exp(-dC / T);
// never accepts an increase at T = 0.
bool metropolis_accept(double delta, double temperature, Rng& rng);

// One line of the optimizer trace log.
struct TraceRecord {
  std::string stage;  // "bfmc", "dbmc", "cbmc", "tau"
  std::size_t parameters = 0;
  int step = 0;
  double temperature = 0.0;
  double best_cost = 0.0;
  double tau = 0.0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

std::string format_trace(const TraceRecord& r);

}  // namespace bangbang
