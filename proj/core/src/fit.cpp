#include "bangbang/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace bangbang {

namespace {

// Parameters (alpha, u, c) with r0 = x_min - exp(u).
struct Model {
  const std::vector<FitPoint>& pts;
  double x_min;

  double r0(const Eigen::Vector3d& p) const { return x_min - std::exp(p(1)); }

  Eigen::VectorXd residuals(const Eigen::Vector3d& p) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(pts.size()));
    const double base0 = r0(p);
    for (std::size_t i = 0; i < pts.size(); ++i)
      r(static_cast<Eigen::Index>(i)) = std::pow(pts[i].x - base0, p(0)) + p(2) - pts[i].y;
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::Vector3d& p) const {
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(pts.size()), 3);
    const double base0 = r0(p);
    const double gap = std::exp(p(1));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double b = pts[i].x - base0;
      const double v = std::pow(b, p(0));
      const auto row = static_cast<Eigen::Index>(i);
      jac(row, 0) = v * std::log(b);
      jac(row, 1) = p(0) * v / b * gap;
      jac(row, 2) = 1.0;
    }
    return jac;
  }
};

struct Attempt {
  Eigen::Vector3d p;
  double cost;
  int iterations;
  bool converged;
};

Attempt levenberg_marquardt(const Model& m, Eigen::Vector3d p, int max_iterations) {
  double lambda = 1e-3;
  Eigen::VectorXd r = m.residuals(p);
  double cost = r.squaredNorm();
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd jac = m.jacobian(p);
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d g = jac.transpose() * r;
    if (!g.allFinite() || !jtj.allFinite()) return {p, cost, it, false};
    bool improved = false;
    while (lambda < 1e12) {
      Eigen::Matrix3d a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector3d step = a.ldlt().solve(-g);
      const Eigen::Vector3d next = p + step;
      const Eigen::VectorXd rn = m.residuals(next);
      const double cn = rn.squaredNorm();
      if (std::isfinite(cn) && cn < cost) {
        const bool small_step = step.norm() <= 1e-10 * (p.norm() + 1e-10);
        const bool small_gain = cost - cn <= 1e-14 * (cost + 1e-300);
        p = next;
        r = rn;
        cost = cn;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (small_step || small_gain) return {p, cost, it, true};
        break;
      }
      lambda *= 4.0;
    }
    // No downhill step at any damping: a (local) minimum.
    if (!improved) return {p, cost, it, true};
  }
  return {p, cost, max_iterations, false};
}

}  // namespace

double PowerLawFit::operator()(double x) const {
  if (!(x > r0)) throw InvalidArgument("power law evaluated at x <= r0");
  return std::pow(x - r0, alpha) + c;
}

PowerLawFit fit_bifurcation(const std::vector<FitPoint>& data, FitWindow window,
                            const FitOptions& options) {
  std::vector<FitPoint> pts;
  for (const FitPoint& p : data)
    if (p.x >= window.lo && p.x <= window.hi) pts.push_back(p);
  if (pts.size() < options.min_points)
    throw InvalidArgument("power-law fit needs at least " + std::to_string(options.min_points) +
                          " points in the window");
  std::sort(pts.begin(), pts.end(), [](const FitPoint& a, const FitPoint& b) { return a.x < b.x; });

  const auto [lo_y, hi_y] = std::minmax_element(pts.begin(), pts.end(),
                                                [](const FitPoint& a, const FitPoint& b) { return a.y < b.y; });
  const double range = hi_y->y - lo_y->y;
  if (!(range > 1e-12 * std::max(1.0, std::abs(hi_y->y))))
    throw InvalidArgument("power-law fit rejected: constant data carries no onset");
  const double span = pts.back().x - pts.front().x;
  if (!(span > 0.0)) throw InvalidArgument("power-law fit needs distinct x values");

  const Model model{pts, pts.front().x};
  PowerLawFit best;
  best.points = pts.size();
  best.window = window;
  best.data_range = range;
  double best_cost = std::numeric_limits<double>::infinity();

  for (int s = 0; s < options.starts; ++s) {
    // Offsets from 1e-3 to ~3 spans below the first point, log spaced.
    const double frac = options.starts == 1 ? 0.1 : std::pow(10.0, -3.0 + 3.5 * s / (options.starts - 1));
    Eigen::Vector3d p(0.5, std::log(frac * span), 0.0);
    const double r0 = model.r0(p);
    double shift = 0.0;
    for (const FitPoint& q : pts) shift += q.y - std::pow(q.x - r0, p(0));
    p(2) = shift / static_cast<double>(pts.size());

    const Attempt a = levenberg_marquardt(model, p, options.max_iterations);
    if (!a.p.allFinite() || !std::isfinite(a.cost)) continue;
    const bool better_converged = a.converged && (!best.converged || a.cost < best_cost);
    const bool better_unconverged = !best.converged && a.cost < best_cost;
    if (better_converged || better_unconverged) {
      best_cost = a.cost;
      best.alpha = a.p(0);
      best.r0 = model.r0(a.p);
      best.c = a.p(2);
      best.residual_norm = std::sqrt(a.cost);
      best.iterations = a.iterations;
      best.converged = a.converged;
    }
  }
  if (!best.converged) throw FitFailure("power-law fit did not converge from any start", best);
  return best;
}

}  // namespace bangbang
