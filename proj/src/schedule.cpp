#include "tikdyn/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "tikdyn/error.hpp"

namespace tikdyn {
namespace {

constexpr int kGridPerDecade = 20;

std::vector<double> GeometricGrid(double lo, double hi, int per_decade) {
  std::vector<double> grid;
  const double decades = std::log10(hi / lo);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
  grid.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    grid.push_back(k == n - 1 ? hi : lo * std::pow(10.0, decades * k / (n - 1)));
  }
  return grid;
}

double PowerDerivative(double p, double t) { return p == 0.0 ? 0.0 : p * std::pow(t, p - 1.0); }

// Samples |fn| on the last decade below horizon. `decay` asks for a
// nonincreasing tail with slope <= -0.05 per decade in log-log terms (or a
// vanishing magnitude); otherwise the mirror condition for growth.
LimitCheck SampledLimit(std::string expression, const std::function<double(double)>& fn,
                        double horizon, double t0, bool decay) {
  LimitCheck out;
  out.expression = std::move(expression);
  const double lo = std::max(t0, horizon / 10.0);
  const auto grid = GeometricGrid(lo, horizon, kGridPerDecade);
  std::vector<double> mags;
  mags.reserve(grid.size());
  for (double t : grid) mags.push_back(std::abs(fn(t)));
  for (std::size_t k = 1; k < mags.size(); ++k) {
    const double prev = mags[k - 1];
    const double cur = mags[k];
    const bool ok = decay ? cur <= prev * (1.0 + 1e-12) : cur >= prev * (1.0 - 1e-12);
    if (!ok || std::isnan(cur)) {
      out.holds = false;
      out.detail = fmt::format("not monotone at t={:.6g} ({:.6g} -> {:.6g})", grid[k], prev, cur);
      return out;
    }
  }
  const double first = mags.front();
  const double last = mags.back();
  const double span = std::log10(grid.back() / grid.front());
  if (decay) {
    if (last <= 1e-12) {
      out.holds = true;
      out.detail = fmt::format("vanishes ({:.3g} at t={:.6g})", last, grid.back());
      return out;
    }
    const double slope = std::log10(last / first) / span;
    out.holds = slope <= -0.05;
    out.detail = fmt::format("tail slope {:.4g} at t={:.6g}", slope, grid.back());
  } else {
    if (!std::isfinite(last) || last >= 1e12) {
      out.holds = true;
      out.detail = fmt::format("diverges ({:.3g} at t={:.6g})", last, grid.back());
      return out;
    }
    const double slope = first > 0.0 ? std::log10(last / first) / span : 0.0;
    out.holds = slope >= 0.05;
    out.detail = fmt::format("tail slope {:.4g} at t={:.6g}", slope, grid.back());
  }
  return out;
}

LimitCheck ExponentLimit(std::string expression, double coefficient, double exponent) {
  LimitCheck out;
  out.expression = std::move(expression);
  if (coefficient == 0.0) {
    out.holds = true;
    out.detail = "identically zero";
  } else {
    out.holds = exponent < 0.0;
    out.detail = fmt::format("~ {:.6g} t^{:.6g}", coefficient, exponent);
  }
  return out;
}

void RequireHorizon(double horizon, double t0) {
  if (!(t0 > 0.0) || !(horizon > t0)) {
    Throw(ErrorCode::kInvalidParameter, "need 0 < t0 < horizon");
  }
}

}  // namespace

ParamSchedule ParamSchedule::Polynomial(double l, double d) {
  if (!(l >= 0.0) || !(d > 0.0) || !std::isfinite(l) || !std::isfinite(d)) {
    Throw(ErrorCode::kInvalidParameter, "polynomial schedule needs l >= 0 and d > 0");
  }
  ParamSchedule s;
  s.kind_ = ScheduleKind::kPolynomial;
  s.name_ = fmt::format("polynomial(l={:g},d={:g})", l, d);
  s.l_ = l;
  s.d_ = d;
  s.lambda_ = [l](double t) { return std::pow(t, l); };
  s.lambda_dot_ = [l](double t) { return PowerDerivative(l, t); };
  s.eps_ = [d](double t) { return std::pow(t, -d); };
  s.eps_dot_ = [d](double t) { return -d * std::pow(t, -d - 1.0); };
  return s;
}

ParamSchedule ParamSchedule::Custom(std::string name, Fn lambda, Fn lambda_dot, Fn eps,
                                    Fn eps_dot, bool tikhonov_off) {
  if (!lambda || !lambda_dot || !eps || !eps_dot) {
    Throw(ErrorCode::kInvalidParameter, "custom schedule needs all four functions");
  }
  ParamSchedule s;
  s.kind_ = ScheduleKind::kCustom;
  s.name_ = std::move(name);
  s.tikhonov_off_ = tikhonov_off;
  s.lambda_ = std::move(lambda);
  s.lambda_dot_ = std::move(lambda_dot);
  s.eps_ = std::move(eps);
  s.eps_dot_ = std::move(eps_dot);
  return s;
}

void ParamSchedule::Validate(double t0, double horizon) const {
  RequireHorizon(horizon, t0);
  for (double t : GeometricGrid(t0, horizon, kGridPerDecade)) {
    const double lam = lambda(t);
    const double lam_dot = lambda_dot(t);
    const double e = eps(t);
    const double e_dot = eps_dot(t);
    if (!std::isfinite(lam) || !std::isfinite(lam_dot) || !std::isfinite(e) ||
        !std::isfinite(e_dot)) {
      Throw(ErrorCode::kInvalidParameter, fmt::format("{}: non-finite value at t={:g}", name_, t));
    }
    if (!(lam > 0.0)) {
      Throw(ErrorCode::kInvalidParameter, fmt::format("{}: lambda({:g}) <= 0", name_, t));
    }
    if (lam_dot < 0.0) {
      Throw(ErrorCode::kInvalidParameter, fmt::format("{}: lambda decreasing at t={:g}", name_, t));
    }
    if (!(e > 0.0)) {
      Throw(ErrorCode::kInvalidParameter, fmt::format("{}: bad eps({:g}) = {:g}", name_, t, e));
    }
    if (e_dot > 0.0) {
      Throw(ErrorCode::kInvalidParameter, fmt::format("{}: eps increasing at t={:g}", name_, t));
    }
  }
}

ParamSchedule MakeNamedSchedule(std::string_view name, double l, double d) {
  if (!(l >= 0.0)) Throw(ErrorCode::kInvalidParameter, "schedule exponent l must be >= 0");
  auto lambda = [l](double t) { return std::pow(t, l); };
  auto lambda_dot = [l](double t) { return PowerDerivative(l, t); };
  ParamSchedule::Fn eps;
  ParamSchedule::Fn eps_dot;
  bool off = false;
  if (name == "no_tikhonov") {
    if (!(d > 0.0)) Throw(ErrorCode::kInvalidParameter, "damping exponent d must be > 0");
    eps = [d](double t) { return std::pow(t, -d); };
    eps_dot = [d](double t) { return -d * std::pow(t, -d - 1.0); };
    off = true;
  } else if (name == "log_tikhonov") {
    eps = [](double t) { return 1.0 / (t * (1.0 + std::log(t))); };
    eps_dot = [](double t) {
      const double q = 1.0 + std::log(t);
      return -(1.0 + q) / (t * t * q * q);
    };
  } else {
    Throw(ErrorCode::kConfig, fmt::format("unknown schedule '{}'", name));
  }
  const std::string label = off ? fmt::format("{}(l={:g},d={:g})", name, l, d)
                                : fmt::format("{}(l={:g})", name, l);
  ParamSchedule s = ParamSchedule::Custom(label, lambda, lambda_dot, eps, eps_dot, off);
  s.l_ = l;
  if (off) s.d_ = d;
  return s;
}

void ValidateLyapunovParams(const LyapunovParams& p, double alpha) {
  if (!(p.gamma >= alpha / 2.0) || !(p.gamma < alpha)) {
    Throw(ErrorCode::kInvalidParameter,
          fmt::format("gamma={:g} outside [alpha/2, alpha) for alpha={:g}", p.gamma, alpha));
  }
  if (!(p.a > 0.0) || !(p.c > 0.0)) {
    Throw(ErrorCode::kInvalidParameter, "Lyapunov constants a and c must be positive");
  }
}

GammaRange GammaFeasibleRange(double alpha) {
  if (!(alpha > 0.0)) Throw(ErrorCode::kInvalidParameter, "alpha must be positive");
  GammaRange r;
  r.hi = alpha;
  if (alpha < std::sqrt(2.0)) {
    r.lo = alpha / 2.0;
    r.lo_inclusive = true;
  } else {
    r.lo = (alpha + std::sqrt(std::max(alpha * alpha - 2.0, 0.0))) / 2.0;
    r.lo_inclusive = false;
  }
  return r;
}

LyapunovParams LyapunovParamsForGamma(double alpha, double gamma, double t0) {
  LyapunovParams p;
  p.gamma = gamma;
  p.a = 2.0 * gamma / (alpha - gamma) / 1.1;
  const double slack = 1.0 - 2.0 * gamma * (alpha - gamma);
  // Half of the remaining slack in the eps-weight bound goes to gamma / c.
  // Without slack (gamma outside the feasible range) fall back to c = 2 gamma.
  p.c = slack > 0.0 ? 2.0 * gamma / slack : 2.0 * gamma;
  p.t1 = t0;
  return p;
}

LyapunovParams DefaultLyapunovParams(double alpha, double t0) {
  return LyapunovParamsForGamma(alpha, GammaFeasibleRange(alpha).midpoint(), t0);
}

bool PolynomialFeasible(double l, double d) {
  return d >= 1.0 && d <= 2.0 && l >= 0.0 && l < d;
}

ConditionResult CheckProductVanishesSampled(const ParamSchedule& s, double horizon, double t0) {
  RequireHorizon(horizon, t0);
  ConditionResult r;
  const auto grid = GeometricGrid(std::max(t0, horizon / 10.0), horizon, kGridPerDecade);
  double prev = s.lambda(grid.front()) * s.eps(grid.front());
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double cur = s.lambda(grid[k]) * s.eps(grid[k]);
    if (!(cur <= prev * (1.0 + 1e-12))) {
      r.holds = false;
      r.witness = "lambda*eps not decreasing over the last decade";
      r.witness_time = grid[k];
      r.witness_value = cur;
      return r;
    }
    prev = cur;
  }
  r.witness_time = grid.back();
  r.witness_value = prev;
  r.holds = prev < 1e-3;
  r.witness = r.holds ? "sampled decay below 1e-3" : "lambda*eps still >= 1e-3 at horizon";
  return r;
}

ConditionResult CheckProductVanishes(const ParamSchedule& s, double horizon, double t0) {
  if (s.kind() != ScheduleKind::kPolynomial) return CheckProductVanishesSampled(s, horizon, t0);
  RequireHorizon(horizon, t0);
  ConditionResult r;
  r.holds = s.l() < s.d();
  r.witness = fmt::format("lambda*eps = t^{:g}", s.l() - s.d());
  r.witness_time = horizon;
  r.witness_value = std::pow(horizon, s.l() - s.d());
  return r;
}

AssumptionReport CheckAssumptions(const ParamSchedule& s, double alpha, double beta,
                                  const LyapunovParams& p, double t) {
  AssumptionReport r;
  r.t = t;
  const double e = s.eps(t);
  const double ed = s.eps_dot(t);
  const double ld = s.lambda_dot(t);
  if (!(e > 0.0) || s.tikhonov_off()) {
    for (auto& c : r.conditions) c = {false, std::nan("")};
    return r;
  }
  const double g = p.gamma;
  const double se = std::sqrt(e);

  auto set = [&](std::size_t i, double lhs, double rhs) {
    r.conditions[i].margin = rhs - lhs;
    r.conditions[i].holds = lhs <= rhs;
  };
  set(0, -ed / (2.0 * e * se),
      std::min(2.0 * g - alpha - g * beta * ed / (2.0 * e), alpha - g * (p.a + 1.0) / p.a));
  set(1, (2.0 * g * (alpha - g) + g / p.c - 1.0) * e - beta * ed, 0.0);
  set(2, 2.0 * beta * e * e + (2.0 - g * beta * se) * ed, 0.0);
  set(3, (g / p.a + 2.0 * (alpha - g)) * beta * beta * se - 1.5 * beta * beta * ed / e - ld, beta);
  return r;
}

std::optional<double> DetectActivationTime(const ParamSchedule& s, double alpha, double beta,
                                           const LyapunovParams& p, double t0, double horizon) {
  RequireHorizon(horizon, t0);
  const auto grid = GeometricGrid(t0, 10.0 * horizon, kGridPerDecade);
  std::vector<bool> ok;
  ok.reserve(grid.size());
  for (double t : grid) ok.push_back(CheckAssumptions(s, alpha, beta, p, t).all_hold());
  // first_bad_after[k]: index of the first failing grid point at or after k.
  std::vector<std::size_t> first_bad_after(grid.size() + 1, grid.size());
  for (std::size_t k = grid.size(); k-- > 0;) {
    first_bad_after[k] = ok[k] ? first_bad_after[k + 1] : k;
  }
  for (std::size_t k = 0; k < grid.size() && grid[k] <= horizon; ++k) {
    const double window_end = 10.0 * grid[k];
    const std::size_t bad = first_bad_after[k];
    if (bad == grid.size() || grid[bad] > window_end * (1.0 + 1e-12)) return grid[k];
  }
  return std::nullopt;
}

CondSetReport CheckCondSetsSampled(const ParamSchedule& s, double alpha, double gamma,
                                   double horizon, double t0) {
  RequireHorizon(horizon, t0);
  CondSetReport r;
  r.limits[0] = SampledLimit(
      "lambda' eps^(3/2) -> 0",
      [&](double t) { return s.lambda_dot(t) * std::pow(s.eps(t), 1.5); }, horizon, t0, true);
  r.limits[1] = SampledLimit(
      "lambda'/lambda -> 0", [&](double t) { return s.lambda_dot(t) / s.lambda(t); }, horizon,
      t0, true);

  // Cumulative trapezoid of sqrt(eps) on a fine geometric grid from t0.
  const auto fine = GeometricGrid(t0, horizon, 400);
  std::vector<double> integral(fine.size(), 0.0);
  for (std::size_t k = 1; k < fine.size(); ++k) {
    integral[k] = integral[k - 1] + 0.5 * (fine[k] - fine[k - 1]) *
                                        (std::sqrt(s.eps(fine[k])) + std::sqrt(s.eps(fine[k - 1])));
  }
  auto weighted = [&](double t) {
    const auto it = std::lower_bound(fine.begin(), fine.end(), t);
    const std::size_t k = std::min<std::size_t>(it - fine.begin(), fine.size() - 1);
    const double partial = integral[k] - 0.5 * (fine[k] - t) *
                                             (std::sqrt(s.eps(fine[k])) + std::sqrt(s.eps(t)));
    return std::sqrt(s.eps(t)) * std::exp((alpha - gamma) * partial);
  };
  r.limits[2] = SampledLimit("sqrt(eps) exp((alpha-gamma) int sqrt(eps)) -> inf", weighted,
                             horizon, t0, false);
  r.limits[3] = SampledLimit(
      "eps'/eps^(3/2) -> 0", [&](double t) { return s.eps_dot(t) / std::pow(s.eps(t), 1.5); },
      horizon, t0, true);
  r.limits[4] = SampledLimit(
      "lambda' sqrt(eps) -> 0", [&](double t) { return s.lambda_dot(t) * std::sqrt(s.eps(t)); },
      horizon, t0, true);
  r.limits[5] = SampledLimit(
      "lambda'/(lambda sqrt(eps)) -> 0",
      [&](double t) { return s.lambda_dot(t) / (s.lambda(t) * std::sqrt(s.eps(t))); }, horizon,
      t0, true);
  return r;
}

CondSetReport CheckCondSets(const ParamSchedule& s, double alpha, double gamma, double horizon,
                            double t0) {
  if (s.kind() != ScheduleKind::kPolynomial) {
    return CheckCondSetsSampled(s, alpha, gamma, horizon, t0);
  }
  RequireHorizon(horizon, t0);
  const double l = s.l();
  const double d = s.d();
  CondSetReport r;
  r.limits[0] = ExponentLimit("lambda' eps^(3/2) -> 0", l, l - 1.0 - 1.5 * d);
  r.limits[1] = ExponentLimit("lambda'/lambda -> 0", l, -1.0);

  LimitCheck growth;
  growth.expression = "sqrt(eps) exp((alpha-gamma) int sqrt(eps)) -> inf";
  if (d < 2.0) {
    growth.holds = alpha - gamma > 0.0;
    growth.detail = fmt::format("~ t^{:g} exp({:g} t^{:g})", -d / 2.0,
                                (alpha - gamma) / (1.0 - d / 2.0), 1.0 - d / 2.0);
  } else if (d == 2.0) {
    growth.holds = alpha - gamma > 1.0;
    growth.detail = fmt::format("~ t^{:g}", alpha - gamma - 1.0);
  } else {
    growth.holds = false;
    growth.detail = fmt::format("~ t^{:g} (integral converges)", -d / 2.0);
  }
  r.limits[2] = growth;
  r.limits[3] = ExponentLimit("eps'/eps^(3/2) -> 0", -d, d / 2.0 - 1.0);
  r.limits[4] = ExponentLimit("lambda' sqrt(eps) -> 0", l, l - 1.0 - d / 2.0);
  r.limits[5] = ExponentLimit("lambda'/(lambda sqrt(eps)) -> 0", l, d / 2.0 - 1.0);
  return r;
}

}  // namespace tikdyn
