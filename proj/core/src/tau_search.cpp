#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bangbang/optimizer.hpp"

namespace bangbang {

void PipelineConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (!(epsilon_tol > 0.0 && epsilon_tol < epsilon))
    throw InvalidArgument("epsilon_tol must lie in (0, epsilon)");
  auto power_of_two = [](std::size_t n) { return n > 0 && (n & (n - 1)) == 0; };
  if (!power_of_two(n_min) || !power_of_two(n_max) || n_min > n_max)
    throw InvalidArgument("n_min and n_max must be powers of two with n_min <= n_max");
  if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
  if (!(initial_tau > 0.0)) throw InvalidArgument("initial_tau must be positive");
  if (!(extrapolation_target > epsilon && extrapolation_target < 1.0))
    throw InvalidArgument("extrapolation_target must lie in (epsilon, 1)");
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (max_probes < 2) throw InvalidArgument("max_probes must be >= 2");
  cbmc.bound.validate();
}

std::string_view to_string(SearchPhase p) {
  switch (p) {
    case SearchPhase::extrapolating:
      return "extrapolating";
    case SearchPhase::scaling:
      return "scaling";
    case SearchPhase::bisecting:
      return "bisecting";
  }
  return "unknown";
}

BbmcResult bbmc(const Objective& objective, const ControlSpectra& spectra,
                double tau, const PipelineConfig& config, Rng& rng,
                const TraceSink& sink) {
  if (!(tau > 0.0)) throw InvalidArgument("bbmc needs tau > 0");
  const UnitaryCache cache(spectra, tau, config.n_min, config.n_max);
  BbmcResult best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int r = 0; r < config.restarts; ++r) {
    Rng stream = rng.fork();
    const DbmcResult d = dbmc(objective, cache, config.dbmc, stream, {}, sink);
    const CbmcResult c = cbmc(objective, spectra, to_jump(d.protocol), config.cbmc, stream, sink);
    if (c.cost < best.cost) {
      best.protocol = c.protocol;
      best.cost = c.cost;
      best.dbmc_cost = d.cost;
    }
  }
  best.ds = objective.state_distance(evolve_continuous(objective.initial(), best.protocol, spectra));
  return best;
}

double extrapolate_exact_time(const std::vector<TauProbe>& history) {
  if (history.empty()) throw InvalidArgument("no probes to extrapolate from");
  std::vector<const TauProbe*> near;
  for (const TauProbe& p : history)
    if (p.ds <= 0.3 && p.ds > 1e-9) near.push_back(&p);  // saturated probes carry no slope
  std::sort(near.begin(), near.end(), [](auto* a, auto* b) { return a->tau < b->tau; });
  near.erase(std::unique(near.begin(), near.end(), [](auto* a, auto* b) { return a->tau == b->tau; }),
             near.end());

  if (near.size() < 2) {
    // Straight line through (0, 1) and the probe closest to the target.
    const TauProbe& p = *std::min_element(history.begin(), history.end(),
                                          [](const TauProbe& a, const TauProbe& b) { return a.ds < b.ds; });
    return p.tau / std::max(1.0 - p.ds, 1e-12);
  }

  const double scale = near.back()->tau;
  const auto n = static_cast<Eigen::Index>(near.size());
  auto fit = [&](int order) {
    Eigen::MatrixXd a(n, order + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = near[static_cast<std::size_t>(i)]->tau / scale;
      for (int c = 0; c <= order; ++c) a(i, c) = std::pow(x, c);
      y(i) = near[static_cast<std::size_t>(i)]->ds;
    }
    return Eigen::VectorXd(a.colPivHouseholderQr().solve(y));
  };

  const Eigen::VectorXd line = fit(1);
  const double linear_root = line(1) < 0.0 ? -line(0) / line(1) : std::numeric_limits<double>::quiet_NaN();
  if (near.size() >= 3) {
    const Eigen::VectorXd q = fit(2);
    const double a = q(2), b = q(1), c = q(0);
    const double disc = b * b - 4 * a * c;
    if (std::abs(a) > 1e-14 && disc >= 0.0) {
      const double s = std::sqrt(disc);
      const double r1 = (-b - s) / (2 * a);
      const double r2 = (-b + s) / (2 * a);
      const double guide = std::isfinite(linear_root) ? linear_root : 1.0;
      double best = std::numeric_limits<double>::quiet_NaN();
      for (double r : {r1, r2}) {
        if (r <= 0.0) continue;
        if (!std::isfinite(best) || std::abs(r - guide) < std::abs(best - guide)) best = r;
      }
      if (std::isfinite(best)) return best * scale;
    }
  }
  if (std::isfinite(linear_root) && linear_root > 0.0) return linear_root * scale;
  return near.back()->tau;
}

TauSearchResult find_tau_critical(const Objective& objective,
                                  const ControlSpectra& spectra,
                                  const PipelineConfig& config, Rng& rng,
                                  const TraceSink& sink) {
  config.validate();
  TauSearchResult result;
  auto& history = result.history;
  const double eps = config.epsilon;

  auto probe = [&](double tau, SearchPhase phase) {
    BbmcResult r = bbmc(objective, spectra, tau, config, rng, sink);
    history.push_back({tau, r.ds, phase, std::move(r.protocol)});
    if (sink) sink({"tau", history.back().protocol.jump_count(),
                    static_cast<int>(history.size()), 0.0, r.ds, tau});
    return r.ds;
  };
  auto budget_left = [&] { return static_cast<int>(history.size()) < config.max_probes; };
  auto accepted = [&](double ds) { return ds <= eps && ds >= eps - config.epsilon_tol; };

  // Phase 1: probe a short time, grow until the state moves, then aim for
  // D_S ~ extrapolation_target along the line through (0, 1).
  double tau = config.initial_tau;
  double ds = probe(tau, SearchPhase::extrapolating);
  while (ds > 1.0 - 1e-6 && budget_left()) {
    tau *= 4.0;
    ds = probe(tau, SearchPhase::extrapolating);
  }
  if (ds > config.extrapolation_target && budget_left()) {
    const double target = config.extrapolation_target;
    const double next = tau * (1.0 - target) / (1.0 - ds);
    tau = std::clamp(next, 1.1 * tau, 8.0 * tau);
    ds = probe(tau, SearchPhase::extrapolating);
  }

  // Phase 2: grow tau until D_S <= epsilon. The step follows the secant
  // through the last two informative probes, aimed at the middle of the
  // accepted band; without a usable secant it is proportional to D_S.
  const double aim = eps - 0.5 * config.epsilon_tol;
  auto next_scaled = [&](double t, double d) {
    double next = t * (1.0 + config.kappa * d);
    const TauProbe* a = nullptr;
    const TauProbe* b = nullptr;
    for (const TauProbe& p : history)
      if (p.ds > 1e-9 && p.ds < 1.0 - 1e-6) {
        a = b;
        b = &p;
      }
    if (a && b && b->tau != a->tau) {
      const double slope = (b->ds - a->ds) / (b->tau - a->tau);
      if (slope < 0.0) next = b->tau + (aim - b->ds) / slope;
    }
    return std::clamp(next, 1.02 * t, 2.0 * t);
  };
  while (ds > eps && budget_left()) {
    tau = next_scaled(tau, ds);
    ds = probe(tau, SearchPhase::scaling);
  }

  auto bracket_high = [&]() -> const TauProbe* {
    const TauProbe* h = nullptr;
    for (const TauProbe& p : history)
      if (p.ds <= eps && (!h || p.tau < h->tau)) h = &p;
    return h;
  };
  const TauProbe* high = bracket_high();
  if (!high) {
    std::ostringstream os;
    os << "tau search did not reach D_S <= " << eps << " within " << history.size()
       << " probes; last (tau, D_S) = (" << tau << ", " << ds << ")";
    throw ConvergenceError(os.str());
  }
  // Make sure there is a lower end above epsilon.
  while (budget_left()) {
    bool has_low = false;
    for (const TauProbe& p : history) has_low |= p.tau < high->tau && p.ds > eps;
    if (has_low) break;
    probe(high->tau * 0.5, SearchPhase::scaling);
    high = bracket_high();
  }

  // Phase 3: shrink the bracket D_S(lo) > epsilon >= D_S(hi) until
  // eps - tol <= D_S <= eps. Each probe interpolates D_S linearly across the
  // bracket, held to its middle 80% so the bracket always shrinks. When the
  // same end survives twice its weight is halved (Illinois rule).
  std::size_t chosen = static_cast<std::size_t>(high - history.data());
  bool done = accepted(history[chosen].ds);
  int kept_lo = 0, kept_hi = 0;
  while (!done && budget_left()) {
    const TauProbe* lo = nullptr;
    const double hi_tau = history[chosen].tau;
    for (const TauProbe& p : history)
      if (p.ds > eps && p.tau < hi_tau && (!lo || p.tau > lo->tau)) lo = &p;
    const double lo_tau = lo ? lo->tau : 0.0;
    const double lo_ds = lo ? lo->ds : 1.0;
    const double width = hi_tau - lo_tau;
    if (width <= 1e-9 * hi_tau) break;
    const double lo_w = aim + (lo_ds - aim) / std::pow(2.0, std::max(0, kept_lo - 1));
    const double hi_w = aim + (history[chosen].ds - aim) / std::pow(2.0, std::max(0, kept_hi - 1));
    // A saturated upper end (D_S = 0) says nothing about the slope.
    double next = history[chosen].ds > 1e-9 ? lo_tau + (lo_w - aim) / (lo_w - hi_w) * width : lo_tau + 0.5 * width;
    next = std::clamp(next, lo_tau + 0.1 * width, hi_tau - 0.1 * width);
    const double d = probe(next, SearchPhase::bisecting);
    if (d <= eps) {
      chosen = history.size() - 1;
      done = accepted(d);
      ++kept_lo;
      kept_hi = 0;
    } else {
      ++kept_hi;
      kept_lo = 0;
    }
  }

  const TauProbe& final = history[chosen];
  result.tau_critical = final.tau;
  result.ds = final.ds;
  result.protocol = final.protocol;
  result.tolerance_met = done;
  result.tau_extrapolated = extrapolate_exact_time(history);
  return result;
}

BaselineResult adiabatic_baseline(const XxzSystem& system, const Vector& initial,
                                  const Vector& target, CouplingRatio r_i,
                                  CouplingRatio r_t, double tau,
                                  std::size_t steps) {
  if (steps == 0) throw InvalidArgument("baseline needs at least one step");
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
  const Couplings from = r_i.normalized();
  const Couplings to = r_t.normalized();
  const double cs_init = state_cost(initial, target);
  if (cs_init < 1e-12) throw StatesCoincide("initial and target states coincide");

  auto run = [&](std::size_t n) {
    Vector psi = initial;
    Vector scratch(psi.size());
    const double dt = tau / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
      const double lambda = (static_cast<double>(s) + 0.5) / static_cast<double>(n);
      const Couplings c{from.j + lambda * (to.j - from.j), from.k + lambda * (to.k - from.k)};
      const EigenDecomposition e = diagonalize(system.hamiltonian(c));
      scratch.noalias() = e.vectors.adjoint() * psi;
      for (Eigen::Index i = 0; i < scratch.size(); ++i) scratch(i) *= std::polar(1.0, -dt * e.values(i));
      psi.noalias() = e.vectors * scratch;
    }
    return state_cost(psi, target) / cs_init;
  };

  std::size_t n = steps;
  double previous = run(n);
  for (int doubling = 0; doubling < 24; ++doubling) {
    n *= 2;
    const double current = run(n);
    if (std::abs(current - previous) < 1e-3) return {current, n};
    previous = current;
  }
  throw ConvergenceError("adiabatic baseline did not converge in the step count");
}

}  // namespace bangbang
