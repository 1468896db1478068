#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bangbang/anneal.hpp"
#include "bangbang/hamiltonian.hpp"
#include "bangbang/propagator.hpp"
#include "bangbang/protocol.hpp"
#include "bangbang/rng.hpp"

namespace bangbang {

enum class CostKind { state, energy };

// Normalized distance of a final state from the target: D_S, or D_E when
// built with energy_distance. Construction refuses coinciding states.
class Objective {
 public:
  static Objective state_distance(Vector initial, Vector target);
  static Objective energy_distance(Vector initial, Vector target,
                                   const SectorOperator& h_target, double e0);

  double operator()(const Vector& psi) const;
  double state_distance(const Vector& psi) const;

  CostKind kind() const { return kind_; }
  const Vector& initial() const { return initial_; }
  const Vector& target() const { return target_; }

 private:
  Objective() = default;

  CostKind kind_ = CostKind::state;
  Vector initial_;
  Vector target_;
  double cs_initial_ = 1.0;
  Matrix h_target_;
  double e0_ = 0.0;
  double ce_span_ = 1.0;
};

struct Stage {
  double cost = 0.0;
  double temperature = 0.0;
};

// Continuous-valued piecewise protocols, all values free in [0, 1].
struct BfmcOptions {
  AnnealOptions anneal{.moves_per_parameter = 25.0};
  // Lower bound on the move width. Without it the chain freezes long before
  // the temperature does and interior values never reach the bounds.
  double min_move = 0.05;
};

struct BfmcResult {
  PiecewiseProtocol protocol;
  double cost = 0.0;
  std::vector<Stage> trace;  // best cost after each stage
  double t0 = 0.0;
};

BfmcResult bfmc(const Objective& objective, const ControlSpectra& spectra,
                double tau, std::size_t intervals, const BfmcOptions& options,
                Rng& rng, const std::optional<PiecewiseProtocol>& initial = {},
                const TraceSink& sink = {});

struct DbmcOptions {
  AnnealOptions anneal{};
  // T0 of the refinement rungs relative to their own calibration.
  double refine_temperature_scale = 1.0;
  bool reroll = true;
};

struct DbmcRung {
  std::size_t intervals = 0;
  double initial_cost = 0.0;
  double best_cost = 0.0;
  double t0 = 0.0;
};

struct DbmcResult {
  PiecewiseProtocol protocol;
  double cost = 0.0;
  std::vector<DbmcRung> rungs;
};

// Bang values on the interval ladder n_min, 2 n_min, ..., n_max of `cache`.
DbmcResult dbmc(const Objective& objective, const UnitaryCache& cache,
                const DbmcOptions& options, Rng& rng,
                const std::optional<PiecewiseProtocol>& initial = {},
                const TraceSink& sink = {});

struct CbmcOptions {
  AnnealOptions anneal{.moves_per_parameter = 200.0};
  MoveBound bound{};
};

struct CbmcResult {
  JumpProtocol protocol;
  double cost = 0.0;
  double initial_cost = 0.0;
  double t0 = 0.0;
  double largest_frozen_shift = 0.0;  // max |shift| accepted at T = 0
  std::vector<Stage> trace;
};

// Anneals jump times at a fixed jump count.
CbmcResult cbmc(const Objective& objective, const ControlSpectra& spectra,
                const JumpProtocol& initial, const CbmcOptions& options,
                Rng& rng, const TraceSink& sink = {});

struct PipelineConfig {
  double epsilon = 0.02;
  double epsilon_tol = 0.002;
  std::size_t n_min = 4;
  std::size_t n_max = 64;
  DbmcOptions dbmc{};
  CbmcOptions cbmc{};
  int restarts = 1;                 // independent BBMC runs per probe
  double initial_tau = 0.5;
  double extrapolation_target = 0.2;
  double kappa = 0.5;               // tau <- tau (1 + kappa D_S) while scaling
  int max_probes = 40;

  void validate() const;
};

struct BbmcResult {
  JumpProtocol protocol;
  double cost = 0.0;        // objective value
  double ds = 0.0;          // D_S of the returned protocol
  double dbmc_cost = 0.0;
};

// DBMC over the interval ladder followed by CBMC on the converted protocol.
BbmcResult bbmc(const Objective& objective, const ControlSpectra& spectra,
                double tau, const PipelineConfig& config, Rng& rng,
                const TraceSink& sink = {});

enum class SearchPhase { extrapolating, scaling, bisecting };
std::string_view to_string(SearchPhase p);

struct TauProbe {
  double tau = 0.0;
  double ds = 0.0;
  SearchPhase phase = SearchPhase::extrapolating;
  JumpProtocol protocol;
};

struct TauSearchResult {
  double tau_critical = 0.0;
  double ds = 0.0;
  JumpProtocol protocol;
  double tau_extrapolated = 0.0;  // quadratic-fit root of D_S(tau) = 0
  bool tolerance_met = false;     // |D_S - epsilon| <= epsilon_tol
  std::vector<TauProbe> history;
};

TauSearchResult find_tau_critical(const Objective& objective,
                                  const ControlSpectra& spectra,
                                  const PipelineConfig& config, Rng& rng,
                                  const TraceSink& sink = {});

// Root of a low-order polynomial fit of D_S(tau) near the threshold.
double extrapolate_exact_time(const std::vector<TauProbe>& history);

struct BaselineResult {
  double ds = 0.0;
  std::size_t steps = 0;
};

// Linear ramp of the normalized couplings from r_i to r_t over tau, as a
// piecewise-constant product; steps double until D_S moves by < 1e-3.
BaselineResult adiabatic_baseline(const XxzSystem& system, const Vector& initial,
                                  const Vector& target, CouplingRatio r_i,
                                  CouplingRatio r_t, double tau,
                                  std::size_t steps);

}  // namespace bangbang
