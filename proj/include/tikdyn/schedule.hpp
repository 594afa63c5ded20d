#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace tikdyn {

enum class ScheduleKind { kPolynomial, kCustom };

// The pair (lambda(t), eps(t)) with first derivatives. lambda is the Moreau
// envelope index (nondecreasing), eps the Tikhonov weight (nonincreasing).
class ParamSchedule {
 public:
  using Fn = std::function<double(double)>;

  // lambda(t) = t^l, eps(t) = t^-d.
  static ParamSchedule Polynomial(double l, double d);

  static ParamSchedule Custom(std::string name, Fn lambda, Fn lambda_dot, Fn eps, Fn eps_dot,
                              bool tikhonov_off = false);

  double lambda(double t) const { return lambda_(t); }
  double lambda_dot(double t) const { return lambda_dot_(t); }
  double eps(double t) const { return eps_(t); }
  double eps_dot(double t) const { return eps_dot_(t); }

  ScheduleKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  // Exponents; meaningful for polynomial schedules only (l is also set for
  // registered custom schedules built on lambda = t^l).
  double l() const { return l_; }
  double d() const { return d_; }

  // The dynamics run without the Tikhonov term eps x; eps then only sets the
  // viscous damping alpha sqrt(eps).
  bool tikhonov_off() const { return tikhonov_off_; }
  double tikhonov_weight(double t) const { return tikhonov_off_ ? 0.0 : eps_(t); }

  // Checks monotonicity and positivity on a geometric grid over [t0, horizon];
  // throws kInvalidParameter with the first failing sample.
  void Validate(double t0, double horizon) const;

 private:
  friend ParamSchedule MakeNamedSchedule(std::string_view name, double l, double d);

  ParamSchedule() = default;

  ScheduleKind kind_ = ScheduleKind::kCustom;
  std::string name_;
  double l_ = 0.0;
  double d_ = 0.0;
  bool tikhonov_off_ = false;
  Fn lambda_, lambda_dot_, eps_, eps_dot_;
};

// Registered custom schedules, all with lambda(t) = t^l:
//   "no_tikhonov"   Tikhonov term removed, damping alpha sqrt(eps) with eps = t^-d
//   "log_tikhonov"  eps = 1 / (t (1 + ln t)); d is ignored
ParamSchedule MakeNamedSchedule(std::string_view name, double l, double d = 1.5);

struct LyapunovParams {
  double gamma = 0.0;
  double a = 0.0;
  double c = 0.0;
  double t1 = 1.0;
};

// Throws kInvalidParameter unless alpha/2 <= gamma < alpha, a > 0, c > 0.
void ValidateLyapunovParams(const LyapunovParams& p, double alpha);

struct GammaRange {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_inclusive = true;  // false when clipped by 2 gamma (alpha - gamma) < 1
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double gamma) const {
    return (lo_inclusive ? gamma >= lo : gamma > lo) && gamma < hi;
  }
};

// Gammas with alpha/2 <= gamma < alpha and 2 gamma (alpha - gamma) < 1.
GammaRange GammaFeasibleRange(double alpha);

// Defaults: gamma at the midpoint of GammaFeasibleRange, a = 2 gamma / (1.1 (alpha - gamma)),
// c = 2 gamma / (1 - 2 gamma (alpha - gamma)), t1 = t0.
LyapunovParams DefaultLyapunovParams(double alpha, double t0);

// Same a, c rules for a caller-chosen gamma (e.g. gamma = alpha / 2).
LyapunovParams LyapunovParamsForGamma(double alpha, double gamma, double t0);

// 1 <= d <= 2 and 0 <= l < d.
bool PolynomialFeasible(double l, double d);

struct ConditionResult {
  bool holds = false;
  std::string witness;  // why it fails (or how it was decided)
  double witness_time = 0.0;
  double witness_value = 0.0;
};

// lambda(t) eps(t) -> 0. Polynomial: l < d. Custom: geometric-grid samples
// must be nonincreasing over the last decade and end below 1e-3.
ConditionResult CheckProductVanishes(const ParamSchedule& s, double horizon, double t0 = 1.0);

struct ConditionValue {
  bool holds = false;
  double margin = 0.0;  // rhs - lhs; nonnegative when the inequality holds
};

// The four inequalities on the schedule derivatives required at time t, in
// the order: damping-rate bound, eps-weight bound, eps-curvature bound,
// lambda-growth bound.
struct AssumptionReport {
  double t = 0.0;
  std::array<ConditionValue, 4> conditions;
  bool all_hold() const {
    for (const auto& c : conditions) {
      if (!c.holds) return false;
    }
    return true;
  }
};

AssumptionReport CheckAssumptions(const ParamSchedule& s, double alpha, double beta,
                                  const LyapunovParams& p, double t);

// Smallest time on a geometric grid in [t0, horizon] from which the four
// inequalities hold on every grid point of the following decade.
std::optional<double> DetectActivationTime(const ParamSchedule& s, double alpha, double beta,
                                           const LyapunovParams& p, double t0, double horizon);

struct LimitCheck {
  std::string expression;
  bool holds = false;
  std::string detail;
};

// The six asymptotic limits: lambda' eps^1.5 -> 0, lambda'/lambda -> 0,
// sqrt(eps) exp((alpha-gamma) int sqrt(eps)) -> inf, eps'/eps^1.5 -> 0,
// lambda' sqrt(eps) -> 0, lambda'/(lambda sqrt(eps)) -> 0.
struct CondSetReport {
  std::array<LimitCheck, 6> limits;
  bool all_hold() const {
    for (const auto& l : limits) {
      if (!l.holds) return false;
    }
    return true;
  }
};

// Polynomial: decided from the exponents. Custom: each expression is sampled
// on a geometric grid; "-> 0" requires a nonincreasing magnitude over the
// last decade with log-log slope <= -0.05 (or magnitude below 1e-12), and
// "-> inf" the mirror image.
CondSetReport CheckCondSets(const ParamSchedule& s, double alpha, double gamma, double horizon,
                            double t0 = 1.0);

// Forces the sampled decision path even for polynomial schedules.
CondSetReport CheckCondSetsSampled(const ParamSchedule& s, double alpha, double gamma,
                                   double horizon, double t0 = 1.0);
ConditionResult CheckProductVanishesSampled(const ParamSchedule& s, double horizon,
                                            double t0 = 1.0);

}  // namespace tikdyn
