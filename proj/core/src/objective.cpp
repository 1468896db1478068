#include "bangbang/optimizer.hpp"

namespace bangbang {

namespace {

constexpr double kCoincide = 1e-12;

}  // namespace

Objective Objective::state_distance(Vector initial, Vector target) {
  Objective o;
  o.kind_ = CostKind::state;
  o.cs_initial_ = state_cost(initial, target);
  if (o.cs_initial_ < kCoincide) throw StatesCoincide("initial and target states coincide");
  o.initial_ = std::move(initial);
  o.target_ = std::move(target);
  return o;
}

Objective Objective::energy_distance(Vector initial, Vector target,
                                     const SectorOperator& h_target, double e0) {
  Objective o = state_distance(std::move(initial), std::move(target));
  o.kind_ = CostKind::energy;
  o.h_target_ = h_target.matrix();
  o.e0_ = e0;
  o.ce_span_ = o.initial_.dot(o.h_target_ * o.initial_).real() - e0;
  if (o.ce_span_ < kCoincide * std::max(1.0, std::abs(e0)))
    throw StatesCoincide("initial state already has the target ground energy");
  return o;
}

double Objective::state_distance(const Vector& psi) const {
  return state_cost(psi, target_) / cs_initial_;
}

double Objective::operator()(const Vector& psi) const {
  if (kind_ == CostKind::state) return state_distance(psi);
  return (psi.dot(h_target_ * psi).real() - e0_) / ce_span_;
}

}  // namespace bangbang
