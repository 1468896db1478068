#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bangbang/propagator.hpp"
#include "bangbang/protocol.hpp"

namespace bangbang {

// Pi(tau) = -2 |target> <target|psi(tau)>, the final condition of the
// conjugate state for the fidelity cost.
Vector conjugate_final(const Vector& psi_tau, const Vector& target);

// Pi(t) for t in [0, tau], obtained by evolving Pi(tau) backwards under the
// protocol's own piecewise generators.
class ConjugateSampler {
 public:
  ConjugateSampler(Vector pi_tau, JumpProtocol protocol,
                   const ControlSpectra& spectra);

  Vector at(double t) const;
  // Samples for ascending times in one backward sweep.
  std::vector<Vector> at(std::span<const double> ascending) const;

 private:
  Vector pi_tau_;
  JumpProtocol protocol_;
  std::vector<Segment> segments_;
  const ControlSpectra* spectra_;
};

// psi(t) at ascending times in one forward sweep.
std::vector<Vector> forward_states(const Vector& psi0, const JumpProtocol& protocol,
                                   const ControlSpectra& spectra,
                                   std::span<const double> ascending);

struct SingularArc {
  char control = 'J';
  double start = 0.0;
  double end = 0.0;
};

struct SwitchingTrace {
  std::vector<double> times;
  std::vector<double> switch_j;  // Im <Pi(t)|O_J|psi(t)>
  std::vector<double> switch_k;
  std::vector<std::uint8_t> g_j;
  std::vector<std::uint8_t> g_k;
  std::vector<std::uint8_t> consistent;
  std::vector<double> hamiltonian;  // sum_a g_a Im <Pi|O_a|psi>
  std::vector<Complex> pairing;     // <Pi(t)|psi(t)>, constant in t
  double sign_tolerance = 0.0;
  std::vector<SingularArc> singular_arcs;

  double consistent_fraction() const;
};

inline constexpr double kSignTolerance = 1e-6;       // relative to max |switch|
inline constexpr double kSingularArcFraction = 0.05;  // of tau
inline constexpr std::size_t kDefaultSamples = 2048;

// Evaluates both switching functions on a uniform grid of `samples` points
// over [0, tau], raised to ten per jump if fewer, and checks the sign rule:
// g = max where the switch is negative, g = min where it is positive.
SwitchingTrace switching_trace(const Vector& psi0, const Vector& target,
                               const JumpProtocol& protocol,
                               const ControlSpectra& spectra,
                               std::size_t samples = kDefaultSamples,
                               double relative_tolerance = kSignTolerance);

struct JumpCheck {
  char control = 'J';
  double time = 0.0;
  double before = 0.0;  // switching value just before the jump
  double after = 0.0;
  bool ok = false;      // sign change, or |value| within tolerance
};

// Switching function of each control across each of its jumps.
std::vector<JumpCheck> check_jumps(const Vector& psi0, const Vector& target,
                                   const JumpProtocol& protocol,
                                   const ControlSpectra& spectra,
                                   double tolerance);

}  // namespace bangbang
