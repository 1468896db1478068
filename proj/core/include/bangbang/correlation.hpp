#pragma once

#include <cstddef>

#include "bangbang/protocol.hpp"
#include "bangbang/rng.hpp"

namespace bangbang {

enum class Control { j, k };

struct CorrelationReport {
  double c = 0.0;           // fraction of [0, 1] on which the controls agree
  std::size_t jumps = 0;    // S, total jumps of the pair
  double background = 0.0;  // mean C of random pairs with S jumps
  double modified = 0.0;    // c - background
};

// Mean agreement of two random controls that share their initial value and
// together carry S uniformly placed jumps.
double correlation_background(std::size_t total_jumps);

// Both traces live on [0, 1]. Exact: agreement measure from merged jumps.
CorrelationReport correlation(const ControlTrace& a, const ControlTrace& b);

// Normalizes both protocols to unit time and compares one control.
CorrelationReport correlation(const JumpProtocol& a, const JumpProtocol& b,
                              Control control);

// Sampled estimate of correlation_background(total_jumps).
double sample_background(std::size_t total_jumps, std::size_t samples, Rng& rng);

}  // namespace bangbang
