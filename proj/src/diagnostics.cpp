#include "tikdyn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "tikdyn/prox.hpp"
#include "tikdyn/tikhonov.hpp"

namespace tikdyn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void RequirePositiveSchedule(const ParamSchedule& s, double t) {
  if (!(s.eps(t) > 0.0) || !(s.lambda(t) > 0.0)) {
    Throw(ErrorCode::kInvalidParameter,
          fmt::format("energy needs eps(t) > 0 and lambda(t) > 0 (t = {:g})", t));
  }
}

bool IsPolynomialWithD(const ParamSchedule& s, bool two) {
  return s.kind() == ScheduleKind::kPolynomial && ((s.d() == 2.0) == two);
}

double AdaptiveSimpson(const std::function<double(double)>& fn, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = fn(lm);
  const double frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return AdaptiveSimpson(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         AdaptiveSimpson(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double Integrate(const std::function<double(double)>& fn, double a, double b, double tol) {
  const double fa = fn(a);
  const double fb = fn(b);
  const double fm = fn(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return AdaptiveSimpson(fn, a, b, fa, fm, fb, whole, tol, 50);
}

// Derivative at the middle of three possibly unevenly spaced samples.
double CenteredDerivative(double t0, double t1, double t2, double f0, double f1, double f2) {
  const double h0 = t1 - t0;
  const double h1 = t2 - t1;
  return (h0 * h0 * f2 - h1 * h1 * f0 + (h1 * h1 - h0 * h0) * f1) / (h0 * h1 * (h0 + h1));
}

}  // namespace

double EnergyAt(const ProxObjective& f, const ParamSchedule& s, double beta, double gamma,
                double t, const Vector& x, const Vector& v) {
  RequirePositiveSchedule(s, t);
  const double lam = s.lambda(t);
  const double e = s.eps(t);
  const RegularizedPoint reg = RegularizedMin(f, e, lam);
  const Envelope env = EvaluateEnvelope(f, lam, x);
  const double gap = env.value + 0.5 * e * x.squaredNorm() - reg.reg_value;
  const Vector bracket = gamma * std::sqrt(e) * (x - reg.point) + v + beta * env.grad;
  return std::max(gap, 0.0) + 0.5 * bracket.squaredNorm();
}

double Energy(const TrajectoryRecord& r, const ProxObjective& f, const ParamSchedule& s,
              const SolverConfig& config, const LyapunovParams& p) {
  return EnergyAt(f, s, config.beta, p.gamma, r.t, r.x, r.velocity);
}

double Mu(const ParamSchedule& s, double alpha, double gamma, double t) {
  const double e = s.eps(t);
  RequirePositiveSchedule(s, t);
  return (alpha - gamma) * std::sqrt(e) - s.eps_dot(t) / (2.0 * e);
}

double LogGammaClosedFormBelowTwo(const ParamSchedule& s, double alpha, double gamma, double t1,
                                  double t) {
  if (s.kind() != ScheduleKind::kPolynomial || !(s.d() < 2.0)) {
    Throw(ErrorCode::kWrongBranch, "closed form for d < 2 requested on another schedule");
  }
  const double d = s.d();
  const double q = 1.0 - 0.5 * d;
  return 0.5 * d * std::log(t / t1) + (alpha - gamma) / q * (std::pow(t, q) - std::pow(t1, q));
}

double LogGammaClosedFormTwo(const ParamSchedule& s, double alpha, double gamma, double t1,
                             double t) {
  if (!IsPolynomialWithD(s, true)) {
    Throw(ErrorCode::kWrongBranch, "closed form for d = 2 requested on another schedule");
  }
  return (alpha - gamma + 1.0) * std::log(t / t1);
}

double LogGammaQuadrature(const ParamSchedule& s, double alpha, double gamma, double t1,
                          double t) {
  Require(t >= t1, ErrorCode::kInvalidParameter, "Gamma needs t >= t1");
  if (t == t1) return 0.0;
  // Integrate in u = ln(s) so the quadrature resolves the region near t1
  // and the tail with the same effort.
  auto integrand = [&](double u) {
    const double tau = std::exp(u);
    return Mu(s, alpha, gamma, tau) * tau;
  };
  return Integrate(integrand, std::log(t1), std::log(t), 1e-12);
}

double LogGammaFactor(const ParamSchedule& s, double alpha, double gamma, double t1, double t) {
  Require(t >= t1, ErrorCode::kInvalidParameter, "Gamma needs t >= t1");
  if (s.kind() == ScheduleKind::kPolynomial) {
    if (s.d() < 2.0) return LogGammaClosedFormBelowTwo(s, alpha, gamma, t1, t);
    if (s.d() == 2.0) return LogGammaClosedFormTwo(s, alpha, gamma, t1, t);
  }
  return LogGammaQuadrature(s, alpha, gamma, t1, t);
}

double GammaFactor(const ParamSchedule& s, double alpha, double gamma, double t1, double t) {
  return std::exp(LogGammaFactor(s, alpha, gamma, t1, t));
}

double GTilde(const ParamSchedule& s, const LyapunovParams& p, double beta, double t) {
  (void)beta;
  RequirePositiveSchedule(s, t);
  const double e = s.eps(t);
  const double ed = s.eps_dot(t);
  const double ld = s.lambda_dot(t);
  const double ratio = 2.0 * ld / s.lambda(t) - ed / e;
  return ld * e * e - ed + p.gamma * (2.0 * p.a + p.c * p.gamma) * std::sqrt(e) * ratio * ratio;
}

double G(const ParamSchedule& s, const LyapunovParams& p, double beta, double t) {
  return GTilde(s, p, beta, t) + 0.5 * p.gamma * beta * s.eps_dot(t) * std::sqrt(s.eps(t));
}

ResidualReport LyapunovResidual(const Trajectory& traj, const ProxObjective& f,
                                const ParamSchedule& s, const SolverConfig& config,
                                const LyapunovParams& p, double tol_abs, double tol_rel) {
  if (s.tikhonov_off()) {
    Throw(ErrorCode::kPrecondition, "energy diagnostics need eps > 0");
  }
  if (traj.record_spacing() > slack::kMaxRecordSpacing * (1.0 + 1e-12)) {
    Throw(ErrorCode::kPrecondition,
          fmt::format("record spacing {:g} exceeds {:g}; lower stride or step",
                      traj.record_spacing(), slack::kMaxRecordSpacing));
  }
  ResidualReport report;
  const double xstar_sq = f.MinimalNormPoint().squaredNorm();
  for (const auto& r : traj.records()) {
    if (r.t < p.t1) continue;
    EnergyRecord e;
    e.t = r.t;
    e.energy = Energy(r, f, s, config, p);
    e.mu = Mu(s, config.alpha, p.gamma, r.t);
    e.gamma_factor = GammaFactor(s, config.alpha, p.gamma, p.t1, r.t);
    e.g_val = G(s, p, config.beta, r.t);
    const double eps = s.eps(r.t);
    const Vector grad_reg = MoreauGrad(f, s.lambda(r.t), r.x) + eps * r.x;
    e.grad_reg_norm_sq = grad_reg.squaredNorm();
    e.residual = kNaN;
    report.records.push_back(e);
  }
  auto& recs = report.records;
  if (recs.size() < 3) {
    Throw(ErrorCode::kInsufficientData,
          fmt::format("{} samples past t1 = {:g}; need at least 3", recs.size(), p.t1));
  }
  report.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < recs.size(); ++i) {
    auto& e = recs[i];
    const double de = CenteredDerivative(recs[i - 1].t, e.t, recs[i + 1].t, recs[i - 1].energy,
                                         e.energy, recs[i + 1].energy);
    e.residual = de + e.mu * e.energy + 0.5 * config.beta * e.grad_reg_norm_sq -
                 0.5 * e.g_val * xstar_sq;
    const double excess = e.residual - (tol_abs + tol_rel * e.energy);
    ++report.checked;
    if (excess <= 0.0) ++report.satisfied;
    if (excess > report.worst_excess) {
      report.worst_excess = excess;
      report.worst_time = e.t;
    }
  }
  return report;
}

IntegratedBoundReport IntegratedBounds(const ResidualReport& residual, const ProxObjective& f,
                                       const SolverConfig& config, double tol) {
  const auto& recs = residual.records;
  Require(recs.size() >= 2, ErrorCode::kInsufficientData, "integrated bounds need two samples");
  const double xstar_sq = f.MinimalNormPoint().squaredNorm();
  IntegratedBoundReport out;
  out.energy_holds = true;
  out.worst_excess = -std::numeric_limits<double>::infinity();

  double dissipation = 0.0;
  double g_integral = 0.0;
  // weighted = int_{t1}^{t_k} Gamma g / Gamma(t_k), carried forward in log space.
  double weighted = 0.0;
  const double e1 = recs.front().energy;
  const double log_gamma1 = std::log(recs.front().gamma_factor);
  double log_gamma_prev = log_gamma1;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const auto& r = recs[k];
    const double log_gamma = std::log(r.gamma_factor);
    if (k > 0) {
      const auto& q = recs[k - 1];
      const double dt = r.t - q.t;
      dissipation += 0.5 * dt * (q.grad_reg_norm_sq + r.grad_reg_norm_sq);
      g_integral += 0.5 * dt * (q.g_val + r.g_val);
      const double shrink = std::exp(log_gamma_prev - log_gamma);
      weighted = weighted * shrink + 0.5 * dt * (q.g_val * shrink + r.g_val);
    }
    log_gamma_prev = log_gamma;
    const double bound = 0.5 * xstar_sq * weighted + e1 * std::exp(log_gamma1 - log_gamma);
    out.times.push_back(r.t);
    out.energy_bound.push_back(bound);
    const double excess = r.energy - bound - tol * (1.0 + bound);
    if (excess > out.worst_excess) {
      out.worst_excess = excess;
      out.worst_time = r.t;
    }
    if (excess > 0.0) out.energy_holds = false;
  }
  out.dissipation_lhs = 0.5 * config.beta * dissipation;
  out.dissipation_rhs = e1 + 0.5 * xstar_sq * g_integral;
  out.dissipation_holds = out.dissipation_lhs <= out.dissipation_rhs + tol;
  return out;
}

CrBoundsReport CheckCrBounds(const Trajectory& traj, const std::vector<double>& energies,
                             const ParamSchedule& s, const ProxObjective& f, double tol) {
  Require(energies.size() == traj.size(), ErrorCode::kInvalidParameter,
          "energies must align with trajectory samples");
  CrBoundsReport report;
  report.bounds[0].name = "moreau_gap";
  report.bounds[1].name = "prox_gap";
  report.bounds[2].name = "prox_displacement";
  report.bounds[3].name = "reg_distance";
  const double xstar_sq = f.MinimalNormPoint().squaredNorm();
  const double fstar = f.OptimalValue();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& r = traj.records()[i];
    const double lam = s.lambda(r.t);
    const double e = s.eps(r.t);
    RequirePositiveSchedule(s, r.t);
    const double en = energies[i];
    const Envelope env = EvaluateEnvelope(f, lam, r.x);
    const RegularizedPoint reg = RegularizedMin(f, e, lam);
    const std::array<double, 4> lhs{env.value - fstar, f.Value(env.prox) - fstar,
                                    (env.prox - r.x).squaredNorm(),
                                    (r.x - reg.point).squaredNorm()};
    const std::array<double, 4> rhs{en + 0.5 * e * xstar_sq, en + 0.5 * e * xstar_sq,
                                    2.0 * lam * en + lam * e * xstar_sq, 2.0 * en / e};
    for (std::size_t k = 0; k < 4; ++k) {
      // Rounding in the two sides grows with their magnitude.
      const double excess = lhs[k] - rhs[k];
      const double allowed = tol + 1e-12 * std::max(std::abs(lhs[k]), std::abs(rhs[k]));
      auto& b = report.bounds[k];
      if (excess > b.worst_excess) {
        b.worst_excess = excess;
        b.worst_time = r.t;
      }
      if (excess > allowed) b.holds = false;
    }
    ++report.samples;
  }
  return report;
}

RateFit FitRate(const std::vector<double>& t, const std::vector<double>& values, double t_lo,
                double t_hi) {
  Require(t.size() == values.size(), ErrorCode::kInvalidParameter,
          "time and value series differ in length");
  Require(t_lo > 0.0 && t_hi > t_lo, ErrorCode::kInvalidParameter,
          "fit window must satisfy 0 < t_lo < t_hi");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      Throw(ErrorCode::kDomain,
            fmt::format("nonpositive value {:g} at t = {:g} inside the fit window", values[i],
                        t[i]));
    }
    const double x = std::log(t[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  if (n < slack::kMinFitSamples) {
    Throw(ErrorCode::kInsufficientData,
          fmt::format("{} samples in [{:g}, {:g}]; need at least {}", n, t_lo, t_hi,
                      slack::kMinFitSamples));
  }
  const double dn = static_cast<double>(n);
  const double cxx = sxx - sx * sx / dn;
  const double cxy = sxy - sx * sy / dn;
  const double cyy = syy - sy * sy / dn;
  Require(cxx > 0.0, ErrorCode::kInsufficientData, "fit window has a single distinct time");
  RateFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.samples = n;
  fit.slope = cxy / cxx;
  fit.intercept = (sy - fit.slope * sx) / dn;
  fit.r_squared = cyy > 0.0 ? (cxy * cxy) / (cxx * cyy) : 1.0;
  return fit;
}

RateFit FitRate(const std::vector<double>& t, const std::vector<double>& values) {
  Require(!t.empty(), ErrorCode::kInsufficientData, "empty series");
  const double hi = *std::max_element(t.begin(), t.end());
  return FitRate(t, values, hi / 10.0, hi);
}

RateFit FitRatePositivePrefix(const std::vector<double>& t, const std::vector<double>& values,
                              double t_lo, double t_hi) {
  Require(t.size() == values.size(), ErrorCode::kInvalidParameter,
          "time and value series differ in length");
  double last_positive = t_lo;
  bool cut = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(values[i] > 0.0)) {
      cut = true;
      break;
    }
    last_positive = t[i];
  }
  if (!cut) return FitRate(t, values, t_lo, t_hi);
  if (!(last_positive > t_lo)) {
    Throw(ErrorCode::kDomain, fmt::format("series is not positive at t = {:g}", t_lo));
  }
  RateFit fit = FitRate(t, values, t_lo, last_positive);
  fit.truncated = true;
  return fit;
}

std::optional<double> PredictedSlope(RateSeries series, const ParamSchedule& s, double alpha,
                                     double gamma) {
  if (s.kind() != ScheduleKind::kPolynomial || !PolynomialFeasible(s.l(), s.d())) {
    return std::nullopt;
  }
  const double d = s.d();
  const double l = s.l();
  if (d < 2.0) {
    switch (series) {
      case RateSeries::kPhiGap: return -d;
      case RateSeries::kProxDisplacementSq: return -(0.5 * d + 1.0 - l);
      case RateSeries::kRegDistanceSq: return -(1.0 - 0.5 * d);
    }
  }
  if (series == RateSeries::kPhiGap) return -std::min(2.0, alpha - gamma + 1.0);
  return std::nullopt;
}

std::vector<double> ProxDisplacementSq(const Trajectory& traj, const ParamSchedule& s) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& r : traj.records()) {
    const double v = s.lambda(r.t) * r.grad_norm;
    out.push_back(v * v);
  }
  return out;
}

std::vector<double> RegDistanceSq(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& r : traj.records()) out.push_back(r.reg_distance * r.reg_distance);
  return out;
}

void WriteDiagnosticsCsv(std::ostream& os, const ResidualReport& report) {
  os << "t,E,mu,Gamma,g,residual\n";
  std::string line;
  for (const auto& e : report.records) {
    line.clear();
    fmt::format_to(std::back_inserter(line), "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                   e.t, e.energy, e.mu, e.gamma_factor, e.g_val, e.residual);
    os << line;
  }
}

void WriteDiagnosticsCsv(const std::string& path, const ResidualReport& report) {
  std::ofstream os(path);
  if (!os) Throw(ErrorCode::kIo, "cannot open " + path + " for writing");
  WriteDiagnosticsCsv(os, report);
  if (!os) Throw(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace tikdyn
