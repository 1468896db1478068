#include <algorithm>
#include <cmath>

#include "bangbang/optimizer.hpp"

namespace bangbang {

namespace {

// Piecewise-constant protocol with arbitrary amplitudes: one unitary per
// interval and the prefix states psi_0 .. psi_N.
class ContinuousChain {
 public:
  ContinuousChain(const ControlSpectra& spectra, double dt, const Vector& psi0,
                  std::vector<Amplitudes> values)
      : spectra_(spectra), dt_(dt), values_(std::move(values)) {
    const std::size_t n = values_.size();
    unitaries_.reserve(n);
    for (const Amplitudes& a : values_) unitaries_.push_back(unitary(a));
    states_.resize(n + 1);
    states_[0] = psi0;
    for (std::size_t i = 0; i < n; ++i) states_[i + 1].noalias() = unitaries_[i] * states_[i];
    trial_.resize(n + 1);
  }

  const std::vector<Amplitudes>& values() const { return values_; }
  const Vector& final_state() const { return states_.back(); }

  const Vector& propose(std::size_t index, Amplitudes value) {
    index_ = index;
    value_ = value;
    trial_unitary_ = unitary(value);
    const std::size_t n = values_.size();
    trial_[index + 1].noalias() = trial_unitary_ * states_[index];
    for (std::size_t i = index + 1; i < n; ++i) trial_[i + 1].noalias() = unitaries_[i] * trial_[i];
    return trial_[n];
  }

  void accept() {
    values_[index_] = value_;
    unitaries_[index_].swap(trial_unitary_);
    for (std::size_t i = index_ + 1; i < states_.size(); ++i) states_[i].swap(trial_[i]);
  }

 private:
  Matrix unitary(Amplitudes a) const {
    const Matrix h = a.j * spectra_.generator(Bang::j_only) + a.k * spectra_.generator(Bang::k_only);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Eigen::VectorXcd phases(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) phases(i) = std::polar(1.0, -dt_ * es.eigenvalues()(i));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  }

  const ControlSpectra& spectra_;
  double dt_;
  std::vector<Amplitudes> values_;
  std::vector<Matrix> unitaries_;
  std::vector<Vector> states_;
  std::vector<Vector> trial_;
  Matrix trial_unitary_;
  std::size_t index_ = 0;
  Amplitudes value_{};
};

Amplitudes perturbed(Amplitudes a, bool j_control, double delta) {
  double& v = j_control ? a.j : a.k;
  v = std::clamp(v + delta, 0.0, 1.0);
  return a;
}

}  // namespace

BfmcResult bfmc(const Objective& objective, const ControlSpectra& spectra,
                double tau, std::size_t intervals, const BfmcOptions& options,
                Rng& rng, const std::optional<PiecewiseProtocol>& initial,
                const TraceSink& sink) {
  if (!(options.min_move >= 0.0 && options.min_move <= 1.0))
    throw InvalidArgument("bfmc min_move must lie in [0, 1]");
  if (intervals == 0) throw InvalidArgument("bfmc needs at least one interval");
  std::vector<Amplitudes> values;
  if (initial) {
    initial->validate();
    if (initial->intervals() != intervals)
      throw InvalidArgument("initial protocol has the wrong interval count");
    values = initial->values;
  } else {
    values.resize(intervals);
    for (Amplitudes& a : values) a = {rng.uniform(), rng.uniform()};
  }

  ContinuousChain chain(spectra, tau / static_cast<double>(intervals),
                        objective.initial(), std::move(values));
  double cost = objective(chain.final_state());
  double best = cost;
  std::vector<Amplitudes> best_values = chain.values();

  auto random_move = [&](double scale) {
    const std::size_t idx = rng.index(intervals);
    const bool j_control = rng.coin();
    const double delta = rng.sign() * rng.uniform() * scale;
    return std::pair{idx, perturbed(chain.values()[idx], j_control, delta)};
  };

  const Calibration cal = calibrate_t0(
      [&] {
        const auto [idx, value] = random_move(1.0);
        return objective(chain.propose(idx, value)) - cost;
      },
      options.anneal.calibration_samples, options.anneal.target_acceptance);
  const AnnealSchedule schedule = AnnealSchedule::make(cal.t0, options.anneal, 2 * intervals);
  // Moves scale with T/T0 down to min_move; frozen stages keep the last width.
  const auto width = [&](int stage) { return std::max(schedule.relative(stage), options.min_move); };
  const double frozen_scale = width(schedule.decay_stages - 1);

  BfmcResult result;
  result.t0 = cal.t0;
  for (int stage = 0; stage < schedule.total_stages(); ++stage) {
    const double temperature = schedule.temperature(stage);
    const double scale = stage < schedule.decay_stages ? width(stage) : frozen_scale;
    for (std::size_t m = 0; m < schedule.moves_per_stage; ++m) {
      const auto [idx, value] = random_move(scale);
      if (value.j == 0.0 && value.k == 0.0) continue;  // both controls off
      const double trial = objective(chain.propose(idx, value));
      if (!metropolis_accept(trial - cost, temperature, rng)) continue;
      chain.accept();
      cost = trial;
      if (cost < best) {
        best = cost;
        best_values = chain.values();
      }
    }
    result.trace.push_back({best, temperature});
    if (sink) sink({"bfmc", 2 * intervals, stage, temperature, best, tau});
  }
  result.protocol = PiecewiseProtocol{tau, std::move(best_values)};
  result.cost = best;
  return result;
}

}  // namespace bangbang
