#include "bangbang/propagator.hpp"

#include <algorithm>
#include <bit>

namespace bangbang {

namespace {

std::size_t bang_slot(Bang b) {
  switch (b) {
    case Bang::both:
      return 0;
    case Bang::j_only:
      return 1;
    case Bang::k_only:
      return 2;
    case Bang::none:
      break;
  }
  throw InvalidArgument("control pair (0,0) has no generator");
}

void check_active(std::span<const Bang> protocol) {
  for (Bang b : protocol) {
    if (b == Bang::none)
      throw InvalidArgument("discrete protocol contains a (0,0) interval");
  }
}

}  // namespace

ControlSpectra::ControlSpectra(const SectorOperator& o_j, const SectorOperator& o_k)
    : dim_(o_j.dim()) {
  if (o_k.dim() != dim_) throw IncompatibleInputs("O_J and O_K dimensions differ");
  generators_[0] = o_j.matrix() + o_k.matrix();
  generators_[1] = o_j.matrix();
  generators_[2] = o_k.matrix();
  const std::array<Couplings, 3> c = {Couplings{1, 1}, Couplings{1, 0}, Couplings{0, 1}};
  for (std::size_t s = 0; s < 3; ++s)
    eig_[s] = diagonalize(SectorOperator(generators_[s], c[s]));
}

const EigenDecomposition& ControlSpectra::operator[](Bang b) const {
  return eig_[bang_slot(b)];
}

const Matrix& ControlSpectra::generator(Bang b) const {
  return generators_[bang_slot(b)];
}

void ControlSpectra::apply(Bang b, double dt, Vector& psi, Vector& scratch) const {
  const EigenDecomposition& e = eig_[bang_slot(b)];
  scratch.noalias() = e.vectors.adjoint() * psi;
  for (Eigen::Index i = 0; i < dim_; ++i) scratch(i) *= std::polar(1.0, -dt * e.values(i));
  psi.noalias() = e.vectors * scratch;
}

Matrix ControlSpectra::unitary(Bang b, double dt) const {
  const EigenDecomposition& e = eig_[bang_slot(b)];
  Eigen::VectorXcd phases(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) phases(i) = std::polar(1.0, -dt * e.values(i));
  return e.vectors * phases.asDiagonal() * e.vectors.adjoint();
}

UnitaryCache::UnitaryCache(const ControlSpectra& spectra, double tau,
                           std::size_t n_min, std::size_t n_max)
    : spectra_(&spectra), tau_(tau), n_min_(n_min), n_max_(n_max) {
  if (n_min == 0 || !std::has_single_bit(n_min) || !std::has_single_bit(n_max) ||
      n_max < n_min) {
    throw InvalidArgument("interval counts must be powers of two with n_min <= n_max");
  }
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
  for (std::size_t n = n_min; n <= n_max; n *= 2) {
    counts_.push_back(n);
    std::array<Matrix, 3> u;
    const double dt = tau / static_cast<double>(n);
    for (std::size_t s = 0; s < 3; ++s) u[s] = spectra.unitary(kActiveBangs[s], dt);
    unitaries_.push_back(std::move(u));
  }
}

bool UnitaryCache::has(std::size_t intervals) const {
  return std::find(counts_.begin(), counts_.end(), intervals) != counts_.end();
}

std::size_t UnitaryCache::level(std::size_t intervals) const {
  const auto it = std::find(counts_.begin(), counts_.end(), intervals);
  if (it == counts_.end()) {
    throw InvalidArgument("interval count " + std::to_string(intervals) +
                          " is not in the unitary cache");
  }
  return static_cast<std::size_t>(it - counts_.begin());
}

const Matrix& UnitaryCache::unitary(std::size_t intervals, Bang b) const {
  return unitaries_[level(intervals)][bang_slot(b)];
}

std::vector<PlanStep> coarse_skip(std::span<const Bang> protocol,
                                  const UnitaryCache& cache, std::size_t from) {
  const std::size_t n = protocol.size();
  if (!cache.has(n)) {
    throw InvalidArgument("interval count " + std::to_string(n) +
                          " is not in the unitary cache");
  }
  const std::size_t max_run = n / cache.n_min();
  std::vector<PlanStep> plan;
  std::size_t p = from;
  while (p < n) {
    std::size_t len = 1;
    // Grow while the doubled block stays aligned, in range and uniform.
    while (len * 2 <= max_run && p % (len * 2) == 0 && p + len * 2 <= n &&
           std::all_of(protocol.begin() + static_cast<std::ptrdiff_t>(p + len),
                       protocol.begin() + static_cast<std::ptrdiff_t>(p + 2 * len),
                       [&](Bang b) { return b == protocol[p]; })) {
      len *= 2;
    }
    plan.push_back({p, len, protocol[p]});
    p += len;
  }
  return plan;
}

PrefixCache::PrefixCache(Vector psi0, std::size_t intervals)
    : states_(intervals + 1), known_(intervals + 1, 0) {
  states_[0] = std::move(psi0);
  known_[0] = 1;
}

const Vector& PrefixCache::at(std::size_t k) const {
  if (!has(k)) throw InvalidArgument("prefix state " + std::to_string(k) + " is not cached");
  return states_[k];
}

std::size_t PrefixCache::anchor(std::size_t k) const {
  std::size_t a = std::min(k, valid_up_to_);
  while (!known_[a]) --a;  // index 0 is always known
  return a;
}

void PrefixCache::store(std::size_t k, const Vector& psi) {
  states_.at(k) = psi;
  known_[k] = 1;
  valid_up_to_ = std::max(valid_up_to_, k);
}

void PrefixCache::truncate(std::size_t k) {
  for (std::size_t i = k + 1; i <= valid_up_to_; ++i) known_[i] = 0;
  valid_up_to_ = std::min(valid_up_to_, k);
}

Vector evolve_discrete(const Vector& psi0, std::span<const Bang> protocol,
                       const UnitaryCache& cache, PrefixCache& prefix,
                       std::size_t changed_at) {
  const std::size_t n = protocol.size();
  if (prefix.intervals() != n)
    throw IncompatibleInputs("prefix cache and protocol lengths differ");
  if (prefix.at(0).size() != psi0.size())
    throw IncompatibleInputs("prefix cache and initial state dimensions differ");
  check_active(protocol);
  if (changed_at >= n && prefix.has(n)) return prefix.final_state();

  const std::size_t start = prefix.anchor(std::min(changed_at, n));
  prefix.truncate(start);
  Vector psi = prefix.at(start);
  Vector scratch(psi.size());
  for (const PlanStep& step : coarse_skip(protocol, cache, start)) {
    scratch.noalias() = cache.unitary(n / step.length, step.bang) * psi;
    psi.swap(scratch);
    prefix.store(step.start + step.length, psi);
  }
  return psi;
}

Vector evolve_discrete(const Vector& psi0, std::span<const Bang> protocol,
                       const UnitaryCache& cache) {
  PrefixCache prefix(psi0, protocol.size());
  return evolve_discrete(psi0, protocol, cache, prefix, 0);
}

IncrementalEvolver::IncrementalEvolver(const UnitaryCache& cache, Vector psi0,
                                       std::vector<Bang> protocol)
    : cache_(&cache),
      psi0_(std::move(psi0)),
      protocol_(std::move(protocol)),
      prefix_(psi0_, protocol_.size()),
      trial_index_(protocol_.size()),
      trial_states_(protocol_.size()),
      scratch_(psi0_.size()) {
  evolve_discrete(psi0_, protocol_, *cache_, prefix_, 0);
}

const Vector& IncrementalEvolver::propose(std::size_t index, Bang value) {
  if (index >= protocol_.size()) throw InvalidArgument("interval index out of range");
  if (value == Bang::none) throw InvalidArgument("control pair (0,0) is not allowed");
  const std::size_t n = protocol_.size();
  pending_index_ = index;
  pending_value_ = value;
  pending_anchor_ = prefix_.anchor(index);

  const Bang old = protocol_[index];
  protocol_[index] = value;
  const std::vector<PlanStep> plan = coarse_skip(protocol_, *cache_, pending_anchor_);
  protocol_[index] = old;

  const Vector* psi = &prefix_.at(pending_anchor_);
  trial_count_ = 0;
  for (const PlanStep& step : plan) {
    Vector& out = trial_states_[trial_count_];
    out.noalias() = cache_->unitary(n / step.length, step.bang) * (*psi);
    trial_index_[trial_count_] = step.start + step.length;
    psi = &out;
    ++trial_count_;
  }
  return *psi;
}

void IncrementalEvolver::accept() {
  protocol_[pending_index_] = pending_value_;
  prefix_.truncate(pending_anchor_);
  for (std::size_t t = 0; t < trial_count_; ++t)
    prefix_.store(trial_index_[t], trial_states_[t]);
  trial_count_ = 0;
}

Vector evolve_continuous(const Vector& psi0, const JumpProtocol& protocol,
                         const ControlSpectra& spectra) {
  protocol.validate();
  Vector psi = psi0;
  Vector scratch(psi.size());
  for (const Segment& s : segments(protocol)) {
    if (s.length <= 0.0) continue;
    if (s.bang == Bang::none)
      throw InvalidArgument("jump protocol has a (0,0) segment of positive length");
    spectra.apply(s.bang, s.length, psi, scratch);
  }
  return psi;
}

}  // namespace bangbang
