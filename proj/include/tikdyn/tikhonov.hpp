#pragma once

#include <vector>

#include "tikdyn/objective.hpp"
#include "tikdyn/schedule.hpp"
#include "tikdyn/vector.hpp"

namespace tikdyn {

// Minimizer of the strongly convex phi(x) = f_lambda(x) + eps |x|^2 / 2.
struct RegularizedPoint {
  double epsilon = 0.0;
  double lambda = 0.0;
  Vector point;
  double reg_value = 0.0;  // phi at its minimizer
};

// point = prox_{(lambda + 1/eps) f}(0) / (lambda eps + 1),
// reg_value = f_{lambda + 1/eps}(0).
RegularizedPoint RegularizedMin(const ProxObjective& f, double epsilon, double lambda);

// f_lambda(x) + eps |x|^2 / 2.
double RegValueAt(const ProxObjective& f, double epsilon, double lambda, const Vector& x);

struct TikhonovPathReport {
  std::vector<double> times;
  std::vector<double> norms;      // |x_{eps(t),lambda(t)}|
  std::vector<double> distances;  // |x_{eps(t),lambda(t)} - x*|
  double minimal_norm = 0.0;      // |x*|
  bool norms_bounded = false;     // every norm <= |x*| (+1e-12 relative)
  bool eventually_decreasing = false;
  bool below_tolerance = false;   // last distance <= tolerance
  bool ok() const { return norms_bounded && eventually_decreasing && below_tolerance; }
};

// Walks the regularization path at increasing times. "Eventually
// decreasing" means the distance sequence is nonincreasing from some index
// on and at least the last step does not increase. Throws kPrecondition if
// lambda(t) eps(t) does not vanish.
TikhonovPathReport TikhonovPathCheck(const ProxObjective& f, const ParamSchedule& schedule,
                                     const std::vector<double>& times, double tolerance);

}  // namespace tikdyn
