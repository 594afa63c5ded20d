#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tikdyn/dynamics.hpp"
#include "tikdyn/objective.hpp"
#include "tikdyn/schedule.hpp"
#include "tikdyn/vector.hpp"

namespace tikdyn {

// Fixed numerical slack used by the checks below.
namespace slack {
inline constexpr double kResidualAbs = 1e-3;
inline constexpr double kResidualRel = 1e-3;
inline constexpr double kIntegrated = 1e-3;
inline constexpr double kBound = 1e-9;
inline constexpr double kSlope = 0.4;
inline constexpr double kMaxRecordSpacing = 0.1;
inline constexpr std::size_t kMinFitSamples = 20;
}  // namespace slack

// phi(x) - phi(x_reg) + |gamma sqrt(eps) (x - x_reg) + v + beta grad f_lambda(x)|^2 / 2
// with phi = f_lambda + eps |.|^2 / 2 and x_reg its minimizer. Throws
// kInvalidParameter unless eps(t), lambda(t) > 0.
double EnergyAt(const ProxObjective& f, const ParamSchedule& s, double beta, double gamma,
                double t, const Vector& x, const Vector& v);
double Energy(const TrajectoryRecord& r, const ProxObjective& f, const ParamSchedule& s,
              const SolverConfig& config, const LyapunovParams& p);

// mu = (alpha - gamma) sqrt(eps) - eps' / (2 eps).
double Mu(const ParamSchedule& s, double alpha, double gamma, double t);

// Gamma(t) = exp(int_{t1}^t mu). Closed forms for polynomial schedules:
//   d < 2: (t/t1)^{d/2} exp((alpha-gamma)/(1-d/2) (t^{1-d/2} - t1^{1-d/2}))
//   d = 2: (t/t1)^{alpha-gamma+1}
// The log variants avoid overflow. GammaFactor picks the closed form when one
// applies and adaptive Simpson quadrature otherwise.
double LogGammaClosedFormBelowTwo(const ParamSchedule& s, double alpha, double gamma, double t1,
                                  double t);  // kWrongBranch unless polynomial with d < 2
double LogGammaClosedFormTwo(const ParamSchedule& s, double alpha, double gamma, double t1,
                             double t);  // kWrongBranch unless polynomial with d == 2
double LogGammaQuadrature(const ParamSchedule& s, double alpha, double gamma, double t1,
                          double t);
double LogGammaFactor(const ParamSchedule& s, double alpha, double gamma, double t1, double t);
double GammaFactor(const ParamSchedule& s, double alpha, double gamma, double t1, double t);

// g = lambda' eps^2 - eps' + gamma beta eps' sqrt(eps) / 2
//     + gamma (2a + c gamma) sqrt(eps) (2 lambda'/lambda - eps'/eps)^2
double G(const ParamSchedule& s, const LyapunovParams& p, double beta, double t);
// g without the gamma beta eps' sqrt(eps) / 2 term (which is <= 0), so G <= GTilde.
double GTilde(const ParamSchedule& s, const LyapunovParams& p, double beta, double t);

struct EnergyRecord {
  double t = 0.0;
  double energy = 0.0;
  double mu = 0.0;
  double gamma_factor = 0.0;
  double g_val = 0.0;
  double grad_reg_norm_sq = 0.0;  // |grad f_lambda(x) + eps x|^2
  double residual = 0.0;          // E' + mu E + beta/2 |grad phi|^2 - g |x*|^2 / 2; NaN off-grid
};

struct ResidualReport {
  std::vector<EnergyRecord> records;  // one per trajectory sample at or after t1
  std::size_t checked = 0;            // interior samples with a residual
  std::size_t satisfied = 0;          // residual <= abs + rel * E
  double fraction() const {
    return checked == 0 ? 0.0 : static_cast<double>(satisfied) / static_cast<double>(checked);
  }
  double worst_excess = 0.0;  // max of residual - (abs + rel * E)
  double worst_time = 0.0;
};

// Centered differences of E over the samples past p.t1. Throws kPrecondition
// when the record spacing exceeds 0.1 or eps vanishes, kInsufficientData with
// fewer than three samples past t1.
ResidualReport LyapunovResidual(const Trajectory& traj, const ProxObjective& f,
                                const ParamSchedule& s, const SolverConfig& config,
                                const LyapunovParams& p, double tol_abs = slack::kResidualAbs,
                                double tol_rel = slack::kResidualRel);

// Integrated forms, trapezoid on the record grid:
//   beta/2 int |grad phi|^2 <= E(t1) + |x*|^2/2 int g
//   E(t) <= |x*|^2 / (2 Gamma(t)) int Gamma g + Gamma(t1) E(t1) / Gamma(t)
struct IntegratedBoundReport {
  std::vector<double> times;
  std::vector<double> energy_bound;  // right side of the second inequality
  bool dissipation_holds = false;
  double dissipation_lhs = 0.0;
  double dissipation_rhs = 0.0;
  bool energy_holds = false;  // at every sample, E <= B + tol (1 + B)
  double worst_excess = 0.0;
  double worst_time = 0.0;
};
IntegratedBoundReport IntegratedBounds(const ResidualReport& residual, const ProxObjective& f,
                                       const SolverConfig& config,
                                       double tol = slack::kIntegrated);

// Pointwise consequences of the energy estimate, each with additive slack:
//   f_lambda(x) - f*        <= E + eps |x*|^2 / 2
//   f(prox_{lambda f}(x)) - f* <= E + eps |x*|^2 / 2
//   |prox_{lambda f}(x) - x|^2 <= 2 lambda E + lambda eps |x*|^2
//   |x - x_reg|^2             <= 2 E / eps
struct BoundCheck {
  std::string name;
  bool holds = true;
  double worst_excess = -std::numeric_limits<double>::infinity();  // max of lhs - rhs
  double worst_time = 0.0;
};
struct CrBoundsReport {
  std::array<BoundCheck, 4> bounds;
  std::size_t samples = 0;
  bool all_hold() const {
    for (const auto& b : bounds) {
      if (!b.holds) return false;
    }
    return true;
  }
};
CrBoundsReport CheckCrBounds(const Trajectory& traj, const std::vector<double>& energies,
                             const ParamSchedule& s, const ProxObjective& f,
                             double tol = slack::kBound);

// Least-squares line through (log t, log value) on [t_lo, t_hi].
struct RateFit {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
  bool truncated = false;  // t_hi pulled in before the first nonpositive value
};
// Throws kInsufficientData with fewer than 20 samples in the window and
// kDomain for a nonpositive value inside it.
RateFit FitRate(const std::vector<double>& t, const std::vector<double>& values, double t_lo,
                double t_hi);
// Window [max(t)/10, max(t)].
RateFit FitRate(const std::vector<double>& t, const std::vector<double>& values);
// Like FitRate on [t_lo, t_hi], but a series that reaches zero (underflow
// after faster-than-power-law decay) is fitted up to its last positive sample.
RateFit FitRatePositivePrefix(const std::vector<double>& t, const std::vector<double>& values,
                              double t_lo, double t_hi);

enum class RateSeries { kPhiGap, kProxDisplacementSq, kRegDistanceSq };

// Predicted log-log slopes for polynomial schedules:
//   phi gap: -d (d < 2), -min(2, alpha - gamma + 1) (d = 2)
//   |prox - x|^2: -(d/2 + 1 - l) (d < 2)
//   |x - x_reg|^2: -(1 - d/2) (d < 2)
// nullopt where no decay is predicted or the schedule is not polynomial.
std::optional<double> PredictedSlope(RateSeries series, const ParamSchedule& s, double alpha,
                                     double gamma);

// Derived series: (lambda |grad f_lambda|)^2 and reg_distance^2.
std::vector<double> ProxDisplacementSq(const Trajectory& traj, const ParamSchedule& s);
std::vector<double> RegDistanceSq(const Trajectory& traj);

// t,E,mu,Gamma,g,residual; 17 significant digits.
void WriteDiagnosticsCsv(std::ostream& os, const ResidualReport& report);
void WriteDiagnosticsCsv(const std::string& path, const ResidualReport& report);

}  // namespace tikdyn
