#include "bangbang/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bangbang {

namespace {

bool is_bound(double v) { return v == 0.0 || v == 1.0; }

void validate_trace(const ControlTrace& c, double tau, const char* name) {
  double prev = 0.0;
  for (double t : c.jumps) {
    if (!(t > prev) || !(t < tau)) {
      throw InvalidArgument(std::string("jump times of ") + name +
                            " must be strictly increasing inside (0, tau)");
    }
    prev = t;
  }
}

// Boundaries [0, jumps..., tau] of one control.
std::vector<double> edges(const ControlTrace& c, double tau) {
  std::vector<double> e;
  e.reserve(c.jumps.size() + 2);
  e.push_back(0.0);
  e.insert(e.end(), c.jumps.begin(), c.jumps.end());
  e.push_back(tau);
  return e;
}

struct Pulses {
  int count = 0;
  double on_time = 0.0;
};

Pulses pulses(const ControlTrace& c, double tau) {
  const std::vector<double> e = edges(c, tau);
  Pulses p;
  bool on = c.initial_on;
  for (std::size_t s = 0; s + 1 < e.size(); ++s, on = !on) {
    if (!on) continue;
    ++p.count;
    p.on_time += e[s + 1] - e[s];
  }
  return p;
}

double canonicalize_trace(ControlTrace& c, double tau, double threshold) {
  double removed = 0.0;
  for (;;) {
    const std::vector<double> e = edges(c, tau);
    const std::size_t n = e.size() - 1;  // segment count
    if (n <= 1) break;
    std::size_t shortest = 0;
    double width = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n; ++s) {
      const double w = e[s + 1] - e[s];
      if (w < width) {
        width = w;
        shortest = s;
      }
    }
    if (width >= threshold) break;
    removed += width;
    auto& jumps = c.jumps;
    if (shortest == 0) {
      // Leading segment takes the value of its successor.
      jumps.erase(jumps.begin());
      c.initial_on = !c.initial_on;
    } else if (shortest == n - 1) {
      jumps.pop_back();
    } else {
      // Interior segment: drop both bounding jumps so the neighbours merge.
      jumps.erase(jumps.begin() + static_cast<std::ptrdiff_t>(shortest - 1),
                  jumps.begin() + static_cast<std::ptrdiff_t>(shortest + 1));
    }
  }
  return removed;
}

}  // namespace

bool PiecewiseProtocol::is_discrete() const {
  return std::all_of(values.begin(), values.end(), [](const Amplitudes& a) {
    return is_bound(a.j) && is_bound(a.k) && !(a.j == 0.0 && a.k == 0.0);
  });
}

void PiecewiseProtocol::validate() const {
  if (values.empty()) throw InvalidArgument("protocol needs at least one interval");
  if (!(tau >= 0.0)) throw InvalidArgument("protocol tau must be non-negative");
  for (const Amplitudes& a : values) {
    if (!(a.j >= 0.0 && a.j <= 1.0 && a.k >= 0.0 && a.k <= 1.0))
      throw InvalidArgument("protocol values must lie in [0, 1]");
  }
}

std::vector<Bang> to_bangs(const PiecewiseProtocol& p) {
  std::vector<Bang> bangs;
  bangs.reserve(p.values.size());
  for (const Amplitudes& a : p.values) {
    if (!is_bound(a.j) || !is_bound(a.k))
      throw InvalidArgument("protocol is not bang-bang");
    bangs.push_back(make_bang(a.j == 1.0, a.k == 1.0));
  }
  return bangs;
}

PiecewiseProtocol from_bangs(double tau, std::span<const Bang> bangs) {
  PiecewiseProtocol p{tau, {}};
  p.values.reserve(bangs.size());
  for (Bang b : bangs) p.values.push_back({j_on(b) ? 1.0 : 0.0, k_on(b) ? 1.0 : 0.0});
  return p;
}

bool ControlTrace::value_at(double t) const {
  const auto flips = std::upper_bound(jumps.begin(), jumps.end(), t) - jumps.begin();
  return initial_on != (flips % 2 == 1);
}

void JumpProtocol::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw InvalidArgument("jump protocol tau must be positive");
  validate_trace(j, tau, "J");
  validate_trace(k, tau, "K");
}

std::vector<Segment> segments(const JumpProtocol& p) {
  std::vector<double> cuts;
  cuts.reserve(p.jump_count() + 2);
  cuts.push_back(0.0);
  std::merge(p.j.jumps.begin(), p.j.jumps.end(), p.k.jumps.begin(),
             p.k.jumps.end(), std::back_inserter(cuts));
  cuts.push_back(p.tau);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Segment> out;
  out.reserve(cuts.size());
  std::size_t ij = 0;
  std::size_t ik = 0;
  bool j = p.j.initial_on;
  bool k = p.k.initial_on;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    while (ij < p.j.jumps.size() && p.j.jumps[ij] <= cuts[s]) {
      j = !j;
      ++ij;
    }
    while (ik < p.k.jumps.size() && p.k.jumps[ik] <= cuts[s]) {
      k = !k;
      ++ik;
    }
    out.push_back({cuts[s], cuts[s + 1] - cuts[s], make_bang(j, k)});
  }
  return out;
}

JumpProtocol to_jump(const PiecewiseProtocol& p) {
  if (p.values.empty()) throw InvalidArgument("protocol has no intervals");
  for (const Amplitudes& a : p.values) {
    if (!is_bound(a.j) || !is_bound(a.k))
      throw InvalidArgument("to_jump requires a bang-bang (discrete) protocol");
  }
  const std::size_t n = p.values.size();
  JumpProtocol out;
  out.tau = p.tau;
  out.j.initial_on = p.values.front().j == 1.0;
  out.k.initial_on = p.values.front().k == 1.0;
  for (std::size_t m = 1; m < n; ++m) {
    const double t = p.tau * static_cast<double>(m) / static_cast<double>(n);
    if (p.values[m].j != p.values[m - 1].j) out.j.jumps.push_back(t);
    if (p.values[m].k != p.values[m - 1].k) out.k.jumps.push_back(t);
  }
  return out;
}

PiecewiseProtocol sample(const JumpProtocol& p, std::size_t intervals) {
  if (intervals == 0) throw InvalidArgument("sample needs at least one interval");
  PiecewiseProtocol out{p.tau, {}};
  out.values.reserve(intervals);
  for (std::size_t m = 0; m < intervals; ++m) {
    const double t = p.tau * (static_cast<double>(m) + 0.5) / static_cast<double>(intervals);
    out.values.push_back({p.j.value_at(t) ? 1.0 : 0.0, p.k.value_at(t) ? 1.0 : 0.0});
  }
  return out;
}

PulseStats count_pulses(const JumpProtocol& p) {
  PulseStats s;
  const Pulses pj = pulses(p.j, p.tau);
  const Pulses pk = pulses(p.k, p.tau);
  s.p_j = pj.count;
  s.p_k = pk.count;
  if (pj.count > 0) s.on_fraction_j = pj.on_time / (pj.count * p.tau);
  if (pk.count > 0) s.on_fraction_k = pk.on_time / (pk.count * p.tau);
  return s;
}

JumpProtocol normalize(const JumpProtocol& p) {
  if (!(p.tau > 0.0)) throw InvalidArgument("cannot normalize a protocol with tau <= 0");
  JumpProtocol out = p;
  out.tau = 1.0;
  for (double& t : out.j.jumps) t /= p.tau;
  for (double& t : out.k.jumps) t /= p.tau;
  return out;
}

Canonicalized canonicalize(const JumpProtocol& p, double min_width) {
  if (!(min_width >= 0.0)) throw InvalidArgument("min_width must be non-negative");
  Canonicalized out{p, 0.0};
  const double threshold = min_width * p.tau;
  out.removed_measure += canonicalize_trace(out.protocol.j, p.tau, threshold);
  out.removed_measure += canonicalize_trace(out.protocol.k, p.tau, threshold);
  return out;
}

JumpProtocol time_reversed(const JumpProtocol& p) {
  JumpProtocol out;
  out.tau = p.tau;
  auto reverse = [&](const ControlTrace& c) {
    ControlTrace r;
    r.initial_on = c.final_on();
    r.jumps.reserve(c.jumps.size());
    for (auto it = c.jumps.rbegin(); it != c.jumps.rend(); ++it)
      r.jumps.push_back(p.tau - *it);
    return r;
  };
  out.j = reverse(p.j);
  out.k = reverse(p.k);
  return out;
}

}  // namespace bangbang
