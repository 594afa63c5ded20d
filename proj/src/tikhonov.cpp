#include "tikdyn/tikhonov.hpp"

#include <algorithm>
#include <cmath>

#include "tikdyn/error.hpp"
#include "tikdyn/prox.hpp"

namespace tikdyn {

RegularizedPoint RegularizedMin(const ProxObjective& f, double epsilon, double lambda) {
  if (!(epsilon > 0.0) || !(lambda > 0.0) || !std::isfinite(epsilon) || !std::isfinite(lambda)) {
    Throw(ErrorCode::kInvalidParameter, "regularized minimizer needs eps > 0 and lambda > 0");
  }
  const double index = lambda + 1.0 / epsilon;
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(f.dimension()));
  const Envelope outer = EvaluateEnvelope(f, index, zero);
  RegularizedPoint r;
  r.epsilon = epsilon;
  r.lambda = lambda;
  r.point = outer.prox / (lambda * epsilon + 1.0);
  r.reg_value = outer.value;
  return r;
}

double RegValueAt(const ProxObjective& f, double epsilon, double lambda, const Vector& x) {
  if (!(epsilon > 0.0)) Throw(ErrorCode::kInvalidParameter, "eps must be positive");
  return MoreauValue(f, lambda, x) + 0.5 * epsilon * x.squaredNorm();
}

TikhonovPathReport TikhonovPathCheck(const ProxObjective& f, const ParamSchedule& schedule,
                                     const std::vector<double>& times, double tolerance) {
  Require(!times.empty(), ErrorCode::kInvalidParameter, "path check needs at least one time");
  Require(std::is_sorted(times.begin(), times.end()), ErrorCode::kInvalidParameter,
          "path check times must be increasing");
  const double horizon = std::max(times.back(), 10.0 * times.front());
  const ConditionResult product = CheckProductVanishes(schedule, horizon, times.front());
  if (!product.holds) {
    Throw(ErrorCode::kPrecondition, "lambda(t) eps(t) does not vanish: " + product.witness);
  }
  TikhonovPathReport r;
  const Vector& xstar = f.MinimalNormPoint();
  r.minimal_norm = xstar.norm();
  r.times = times;
  for (double t : times) {
    const RegularizedPoint p = RegularizedMin(f, schedule.eps(t), schedule.lambda(t));
    r.norms.push_back(p.point.norm());
    r.distances.push_back((p.point - xstar).norm());
  }
  r.norms_bounded = std::all_of(r.norms.begin(), r.norms.end(), [&](double n) {
    return n <= r.minimal_norm * (1.0 + 1e-12) + 1e-15;
  });
  // Longest nonincreasing suffix must cover the final step.
  std::size_t start = r.distances.size() - 1;
  while (start > 0 && r.distances[start] <= r.distances[start - 1]) --start;
  r.eventually_decreasing = start + 1 < r.distances.size() || r.distances.size() == 1;
  r.below_tolerance = r.distances.back() <= tolerance;
  return r;
}

}  // namespace tikdyn
