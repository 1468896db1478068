#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "bangbang/errors.hpp"

namespace bangbang {

struct FitPoint {
  double x = 0.0;  // r_t
  double y = 0.0;  // pulse width
};

struct FitWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

// y = (x - r0)^alpha + c, valid for x > r0.
struct PowerLawFit {
  double alpha = 0.0;
  double r0 = 0.0;
  double c = 0.0;
  double residual_norm = 0.0;  // Euclidean norm of the residuals
  double data_range = 0.0;     // max y - min y inside the window
  std::size_t points = 0;
  FitWindow window;
  int iterations = 0;
  bool converged = false;

  double operator()(double x) const;
};

class FitFailure : public Error {
 public:
  FitFailure(const std::string& what, PowerLawFit best) : Error(what), best_(best) {}
  const PowerLawFit& best() const { return best_; }

 private:
  PowerLawFit best_;
};

struct FitOptions {
  int starts = 8;
  int max_iterations = 500;
  std::size_t min_points = 6;
};

// Damped least squares from several starting offsets for r0, all below the
// smallest x so the base stays positive. Throws InvalidArgument for too few
// points or constant data and FitFailure when no start converges.
PowerLawFit fit_bifurcation(const std::vector<FitPoint>& data, FitWindow window = {},
                            const FitOptions& options = {});

}  // namespace bangbang
