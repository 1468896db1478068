#include "bangbang/pontryagin.hpp"

#include <algorithm>
#include <cmath>

namespace bangbang {

namespace {

void check_ascending(std::span<const double> times, double tau) {
  double prev = 0.0;
  for (double t : times) {
    if (t < 0.0 || t > tau) throw InvalidArgument("sample time outside [0, tau]");
    if (t < prev) throw InvalidArgument("sample times must be ascending");
    prev = t;
  }
}

// Advances psi from time `from` to `to` (either direction) through the
// segments of the protocol.
void evolve_between(const std::vector<Segment>& segs, const ControlSpectra& spectra,
                    double from, double to, Vector& psi, Vector& scratch) {
  if (to >= from) {
    for (const Segment& s : segs) {
      const double a = std::max(from, s.start);
      const double b = std::min(to, s.start + s.length);
      if (b > a) spectra.apply(s.bang, b - a, psi, scratch);
    }
  } else {
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
      const double a = std::max(to, it->start);
      const double b = std::min(from, it->start + it->length);
      if (b > a) spectra.apply(it->bang, -(b - a), psi, scratch);
    }
  }
}

std::vector<Segment> active_segments(const JumpProtocol& p) {
  p.validate();
  std::vector<Segment> segs = segments(p);
  for (const Segment& s : segs)
    if (s.bang == Bang::none && s.length > 0.0)
      throw InvalidArgument("jump protocol has a (0,0) segment of positive length");
  return segs;
}

double switch_value(const Vector& pi, const Matrix& op, const Vector& psi) {
  return pi.dot(op * psi).imag();
}

}  // namespace

Vector conjugate_final(const Vector& psi_tau, const Vector& target) {
  return -2.0 * target.dot(psi_tau) * target;
}

ConjugateSampler::ConjugateSampler(Vector pi_tau, JumpProtocol protocol,
                                   const ControlSpectra& spectra)
    : pi_tau_(std::move(pi_tau)),
      protocol_(std::move(protocol)),
      segments_(active_segments(protocol_)),
      spectra_(&spectra) {}

Vector ConjugateSampler::at(double t) const {
  const double times[] = {t};
  return std::move(at(times).front());
}

std::vector<Vector> ConjugateSampler::at(std::span<const double> ascending) const {
  check_ascending(ascending, protocol_.tau);
  std::vector<Vector> out(ascending.size());
  Vector pi = pi_tau_;
  Vector scratch(pi.size());
  double now = protocol_.tau;
  for (std::size_t i = ascending.size(); i-- > 0;) {
    evolve_between(segments_, *spectra_, now, ascending[i], pi, scratch);
    now = ascending[i];
    out[i] = pi;
  }
  return out;
}

std::vector<Vector> forward_states(const Vector& psi0, const JumpProtocol& protocol,
                                   const ControlSpectra& spectra,
                                   std::span<const double> ascending) {
  const std::vector<Segment> segs = active_segments(protocol);
  check_ascending(ascending, protocol.tau);
  std::vector<Vector> out;
  out.reserve(ascending.size());
  Vector psi = psi0;
  Vector scratch(psi.size());
  double now = 0.0;
  for (double t : ascending) {
    evolve_between(segs, spectra, now, t, psi, scratch);
    now = t;
    out.push_back(psi);
  }
  return out;
}

double SwitchingTrace::consistent_fraction() const {
  if (consistent.empty()) return 0.0;
  const auto ok = std::count(consistent.begin(), consistent.end(), std::uint8_t{1});
  return static_cast<double>(ok) / static_cast<double>(consistent.size());
}

SwitchingTrace switching_trace(const Vector& psi0, const Vector& target,
                               const JumpProtocol& protocol,
                               const ControlSpectra& spectra, std::size_t samples,
                               double relative_tolerance) {
  if (samples < 2) throw InvalidArgument("switching trace needs at least two samples");
  samples = std::max(samples, 10 * protocol.jump_count());
  SwitchingTrace tr;
  tr.times.resize(samples);
  for (std::size_t s = 0; s < samples; ++s)
    tr.times[s] = protocol.tau * static_cast<double>(s) / static_cast<double>(samples - 1);
  tr.times.back() = protocol.tau;

  const std::vector<Vector> psi = forward_states(psi0, protocol, spectra, tr.times);
  const ConjugateSampler conj(conjugate_final(psi.back(), target), protocol, spectra);
  const std::vector<Vector> pi = conj.at(tr.times);

  const Matrix& o_j = spectra.generator(Bang::j_only);
  const Matrix& o_k = spectra.generator(Bang::k_only);
  double largest = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double sj = switch_value(pi[s], o_j, psi[s]);
    const double sk = switch_value(pi[s], o_k, psi[s]);
    // Control in force on [t, t + dt); the last sample uses the final segment.
    const double t = std::min(tr.times[s], std::nextafter(protocol.tau, 0.0));
    const Bang b = protocol.bang_at(t);
    tr.switch_j.push_back(sj);
    tr.switch_k.push_back(sk);
    tr.g_j.push_back(j_on(b) ? 1 : 0);
    tr.g_k.push_back(k_on(b) ? 1 : 0);
    tr.hamiltonian.push_back((j_on(b) ? sj : 0.0) + (k_on(b) ? sk : 0.0));
    tr.pairing.push_back(pi[s].dot(psi[s]));
    largest = std::max({largest, std::abs(sj), std::abs(sk)});
  }
  tr.sign_tolerance = relative_tolerance * largest;

  auto agrees = [&](double value, bool on) {
    if (std::abs(value) <= tr.sign_tolerance) return true;
    return value < 0.0 ? on : !on;
  };
  tr.consistent.resize(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    tr.consistent[s] = agrees(tr.switch_j[s], tr.g_j[s] != 0) && agrees(tr.switch_k[s], tr.g_k[s] != 0);
  }

  // Spans where a switching function hugs zero.
  auto scan = [&](const std::vector<double>& values, char control) {
    std::size_t s = 0;
    while (s < samples) {
      if (std::abs(values[s]) > tr.sign_tolerance) {
        ++s;
        continue;
      }
      std::size_t e = s;
      while (e + 1 < samples && std::abs(values[e + 1]) <= tr.sign_tolerance) ++e;
      if (tr.times[e] - tr.times[s] > kSingularArcFraction * protocol.tau)
        tr.singular_arcs.push_back({control, tr.times[s], tr.times[e]});
      s = e + 1;
    }
  };
  scan(tr.switch_j, 'J');
  scan(tr.switch_k, 'K');
  return tr;
}

std::vector<JumpCheck> check_jumps(const Vector& psi0, const Vector& target,
                                   const JumpProtocol& protocol,
                                   const ControlSpectra& spectra, double tolerance) {
  const double delta = 1e-7 * protocol.tau;
  struct Probe {
    char control;
    double time;
  };
  std::vector<Probe> probes;
  for (double t : protocol.j.jumps) probes.push_back({'J', t});
  for (double t : protocol.k.jumps) probes.push_back({'K', t});
  std::sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) { return a.time < b.time; });

  std::vector<double> times;
  for (const Probe& p : probes) {
    times.push_back(std::max(0.0, p.time - delta));
    times.push_back(std::min(protocol.tau, p.time + delta));
  }
  const std::vector<Vector> psi = forward_states(psi0, protocol, spectra, times);
  const Vector psi_tau = evolve_continuous(psi0, protocol, spectra);
  const ConjugateSampler conj(conjugate_final(psi_tau, target), protocol, spectra);
  const std::vector<Vector> pi = conj.at(times);

  std::vector<JumpCheck> out;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Matrix& op = spectra.generator(probes[i].control == 'J' ? Bang::j_only : Bang::k_only);
    JumpCheck c;
    c.control = probes[i].control;
    c.time = probes[i].time;
    c.before = switch_value(pi[2 * i], op, psi[2 * i]);
    c.after = switch_value(pi[2 * i + 1], op, psi[2 * i + 1]);
    c.ok = (c.before <= 0.0) != (c.after <= 0.0) || std::abs(c.before) <= tolerance ||
           std::abs(c.after) <= tolerance;
    out.push_back(c);
  }
  return out;
}

}  // namespace bangbang
