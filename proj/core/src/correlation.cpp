#include "bangbang/correlation.hpp"

#include <algorithm>

namespace bangbang {

namespace {

void check_unit(const ControlTrace& c) {
  double prev = 0.0;
  for (double t : c.jumps) {
    if (!(t > prev && t < 1.0))
      throw InvalidArgument("correlation needs strictly increasing jumps inside (0, 1)");
    prev = t;
  }
}

}  // namespace

double correlation_background(std::size_t s) {
  if (s % 2 == 1) return 0.5;
  const double sd = static_cast<double>(s);
  return (sd + 2.0) / (2.0 * (sd + 1.0));
}

CorrelationReport correlation(const ControlTrace& a, const ControlTrace& b) {
  check_unit(a);
  check_unit(b);
  // Walk the merged breakpoints; agreement toggles at every jump of either.
  bool agree = a.initial_on == b.initial_on;
  double agreeing = 0.0;
  double last = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.jumps.size() || ib < b.jumps.size()) {
    const bool take_a = ib == b.jumps.size() || (ia < a.jumps.size() && a.jumps[ia] <= b.jumps[ib]);
    const double t = take_a ? a.jumps[ia++] : b.jumps[ib++];
    if (agree) agreeing += t - last;
    last = t;
    agree = !agree;
  }
  if (agree) agreeing += 1.0 - last;

  CorrelationReport r;
  r.c = std::clamp(agreeing, 0.0, 1.0);
  r.jumps = a.jumps.size() + b.jumps.size();
  r.background = correlation_background(r.jumps);
  r.modified = r.c - r.background;
  return r;
}

CorrelationReport correlation(const JumpProtocol& a, const JumpProtocol& b,
                              Control control) {
  const JumpProtocol na = normalize(a);
  const JumpProtocol nb = normalize(b);
  return control == Control::j ? correlation(na.j, nb.j) : correlation(na.k, nb.k);
}

double sample_background(std::size_t s, std::size_t samples, Rng& rng) {
  if (samples == 0) throw InvalidArgument("sample_background needs samples > 0");
  ControlTrace a, b;
  std::vector<double> times(s);
  double sum = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    for (double& t : times) {
      do t = rng.uniform();
      while (t == 0.0);
    }
    std::sort(times.begin(), times.end());
    a.jumps.clear();
    b.jumps.clear();
    a.initial_on = b.initial_on = rng.coin();
    for (double t : times) (rng.coin() ? a : b).jumps.push_back(t);
    sum += correlation(a, b).c;
  }
  return sum / static_cast<double>(samples);
}

}  // namespace bangbang
