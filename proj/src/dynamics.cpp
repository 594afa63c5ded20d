#include "tikdyn/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "tikdyn/prox.hpp"
#include "tikdyn/tikhonov.hpp"

namespace tikdyn {
namespace {

constexpr double kBlowUp = 1e150;

bool Healthy(const Vector& v) { return v.allFinite() && v.norm() < kBlowUp; }

std::size_t StepCount(const SolverConfig& c) {
  const double exact = (c.horizon - c.t0) / c.step;
  const double n = std::round(exact);
  if (std::abs(n - exact) > 1e-9 * std::max(1.0, exact)) {
    Throw(ErrorCode::kInvalidParameter,
          fmt::format("horizon - t0 = {:g} is not a multiple of step {:g}", c.horizon - c.t0,
                      c.step));
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

void SolverConfig::Validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    Throw(ErrorCode::kInvalidParameter, "alpha must be positive");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    Throw(ErrorCode::kInvalidParameter, "beta must be nonnegative");
  }
  if (!(horizon > t0) || !std::isfinite(horizon) || !std::isfinite(t0)) {
    Throw(ErrorCode::kInvalidParameter, "horizon must exceed t0");
  }
  if (!(step > 0.0) || step > horizon - t0) {
    Throw(ErrorCode::kInvalidParameter, "step must be in (0, horizon - t0]");
  }
  if (stride == 0) Throw(ErrorCode::kInvalidParameter, "stride must be positive");
  if (x0.size() == 0) Throw(ErrorCode::kInvalidParameter, "initial position is empty");
  RequireSameDimension(x0, v0, "initial velocity");
  RequireFinite(x0, "initial position");
  RequireFinite(v0, "initial velocity");
}

StateDerivative RhsBetaPositive(const SolverState& state, const SolverConfig& config,
                                const ProxObjective& f, const ParamSchedule& schedule) {
  if (!(config.beta > 0.0)) {
    Throw(ErrorCode::kWrongBranch, "beta > 0 reformulation called with beta = 0");
  }
  const double a = config.alpha;
  const double b = config.beta;
  const double e = schedule.eps(state.t);
  const double se = std::sqrt(e);
  const double tw = schedule.tikhonov_weight(state.t);
  const Vector grad = MoreauGrad(f, schedule.lambda(state.t), state.x);
  StateDerivative d;
  d.dx = -b * grad - (a * se - 1.0 / b) * state.x - state.w / b;
  const double coeff = a * b * schedule.eps_dot(state.t) / (2.0 * se) - b * tw - 1.0 / b + a * se;
  d.dw = -coeff * state.x - state.w / b;
  return d;
}

StateDerivative RhsBetaZero(const SolverState& state, const SolverConfig& config,
                            const ProxObjective& f, const ParamSchedule& schedule) {
  if (config.beta != 0.0) {
    Throw(ErrorCode::kWrongBranch, "beta = 0 reformulation called with beta > 0");
  }
  const double e = schedule.eps(state.t);
  const Vector grad = MoreauGrad(f, schedule.lambda(state.t), state.x);
  StateDerivative d;
  d.dx = state.w;
  d.dw = -config.alpha * std::sqrt(e) * state.w - grad - schedule.tikhonov_weight(state.t) * state.x;
  return d;
}

StateDerivative Rhs(const SolverState& state, const SolverConfig& config, const ProxObjective& f,
                    const ParamSchedule& schedule) {
  return config.beta > 0.0 ? RhsBetaPositive(state, config, f, schedule)
                           : RhsBetaZero(state, config, f, schedule);
}

SolverState InitialLift(const SolverConfig& config, const ProxObjective& f,
                        const ParamSchedule& schedule) {
  config.Validate();
  SolverState s;
  s.t = config.t0;
  s.x = config.x0;
  if (config.beta > 0.0) {
    const double b = config.beta;
    const Vector grad = MoreauGrad(f, schedule.lambda(config.t0), config.x0);
    s.w = -b * (config.v0 + b * grad) +
          (1.0 - config.alpha * b * std::sqrt(schedule.eps(config.t0))) * config.x0;
  } else {
    s.w = config.v0;
  }
  return s;
}

Vector VelocityOf(const SolverState& state, const SolverConfig& config, const ProxObjective& f,
                  const ParamSchedule& schedule) {
  if (config.beta > 0.0) return RhsBetaPositive(state, config, f, schedule).dx;
  return state.w;
}

TrajectoryRecord MakeRecord(const SolverState& state, const SolverConfig& config,
                            const ProxObjective& f, const ParamSchedule& schedule) {
  TrajectoryRecord r;
  r.t = state.t;
  r.x = state.x;
  r.velocity = VelocityOf(state, config, f, schedule);
  const double lam = schedule.lambda(state.t);
  const Envelope env = EvaluateEnvelope(f, lam, state.x);
  r.moreau_value = env.value;
  r.grad_norm = env.grad.norm();
  r.phi_gap = env.value - f.OptimalValue();
  if (!schedule.tikhonov_off()) {
    const double e = schedule.eps(state.t);
    r.reg_distance = (state.x - RegularizedMin(f, e, lam).point).norm();
  } else {
    r.reg_distance = std::numeric_limits<double>::quiet_NaN();
  }
  r.norm_x = state.x.norm();
  return r;
}

std::vector<std::string> Trajectory::ColumnNames(std::size_t dimension) {
  std::vector<std::string> names{"t"};
  for (std::size_t i = 0; i < dimension; ++i) names.push_back(fmt::format("x_{}", i));
  for (std::size_t i = 0; i < dimension; ++i) names.push_back(fmt::format("v_{}", i));
  for (const char* n : {"moreau_value", "grad_norm", "phi_gap", "reg_distance", "norm_x"}) {
    names.emplace_back(n);
  }
  return names;
}

std::vector<double> Trajectory::Column(std::string_view name) const {
  std::vector<double> out;
  out.reserve(records_.size());
  auto index_of = [&](std::string_view prefix) -> long {
    if (name.substr(0, prefix.size()) != prefix) return -1;
    const std::string rest(name.substr(prefix.size()));
    if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos) return -1;
    const long i = std::stol(rest);
    return i < static_cast<long>(dimension_) ? i : -1;
  };
  if (name == "t") {
    for (const auto& r : records_) out.push_back(r.t);
  } else if (name == "moreau_value") {
    for (const auto& r : records_) out.push_back(r.moreau_value);
  } else if (name == "grad_norm") {
    for (const auto& r : records_) out.push_back(r.grad_norm);
  } else if (name == "phi_gap") {
    for (const auto& r : records_) out.push_back(r.phi_gap);
  } else if (name == "reg_distance") {
    for (const auto& r : records_) out.push_back(r.reg_distance);
  } else if (name == "norm_x") {
    for (const auto& r : records_) out.push_back(r.norm_x);
  } else if (const long i = index_of("x_"); i >= 0) {
    for (const auto& r : records_) out.push_back(r.x[i]);
  } else if (const long j = index_of("v_"); j >= 0) {
    for (const auto& r : records_) out.push_back(r.velocity[j]);
  } else {
    Throw(ErrorCode::kInvalidParameter, fmt::format("unknown trajectory column '{}'", name));
  }
  return out;
}

void Trajectory::WriteCsv(std::ostream& os) const {
  const auto names = ColumnNames(dimension_);
  fmt::print(os, "{}\n", fmt::join(names, ","));
  std::string line;
  for (const auto& r : records_) {
    line.clear();
    fmt::format_to(std::back_inserter(line), "{:.17g}", r.t);
    for (Eigen::Index i = 0; i < r.x.size(); ++i) {
      fmt::format_to(std::back_inserter(line), ",{:.17g}", r.x[i]);
    }
    for (Eigen::Index i = 0; i < r.velocity.size(); ++i) {
      fmt::format_to(std::back_inserter(line), ",{:.17g}", r.velocity[i]);
    }
    fmt::format_to(std::back_inserter(line), ",{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                   r.moreau_value, r.grad_norm, r.phi_gap, r.reg_distance, r.norm_x);
    os << line;
  }
}

void Trajectory::WriteCsv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) Throw(ErrorCode::kIo, "cannot open " + path + " for writing");
  WriteCsv(os);
  if (!os) Throw(ErrorCode::kIo, "write failed for " + path);
}

Trajectory Integrate(const SolverConfig& config, const ProxObjective& f,
                     const ParamSchedule& schedule) {
  config.Validate();
  Require(static_cast<std::size_t>(config.x0.size()) == f.dimension(),
          ErrorCode::kInvalidParameter, "initial position does not match objective dimension");
  schedule.Validate(config.t0, config.horizon);
  const std::size_t steps = StepCount(config);
  const double h = config.step;

  Trajectory traj(f.dimension(), h * static_cast<double>(config.stride));
  const double lambda0 = schedule.lambda(config.t0);
  if (h > lambda0 / 2.0) {
    traj.AddWarning(fmt::format("step {:g} exceeds lambda(t0)/2 = {:g}; expect instability", h,
                                lambda0 / 2.0));
  }
  if (schedule.kind() == ScheduleKind::kPolynomial && config.t0 < 1.0) {
    traj.AddWarning(fmt::format(
        "t0 = {:g} < 1: lambda(t) = t^l is not bounded away from zero near t0", config.t0));
  }

  SolverState state = InitialLift(config, f, schedule);
  traj.Append(MakeRecord(state, config, f, schedule));

  auto rhs = [&](double t, const Vector& x, const Vector& w) {
    return Rhs(SolverState{t, x, w}, config, f, schedule);
  };

  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = state.t;
    const StateDerivative k1 = rhs(t, state.x, state.w);
    const StateDerivative k2 = rhs(t + 0.5 * h, state.x + 0.5 * h * k1.dx, state.w + 0.5 * h * k1.dw);
    const StateDerivative k3 = rhs(t + 0.5 * h, state.x + 0.5 * h * k2.dx, state.w + 0.5 * h * k2.dw);
    const StateDerivative k4 = rhs(t + h, state.x + h * k3.dx, state.w + h * k3.dw);
    SolverState next;
    next.t = config.t0 + static_cast<double>(k) * h;
    next.x = state.x + (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    next.w = state.w + (h / 6.0) * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
    if (!Healthy(next.x) || !Healthy(next.w)) {
      throw AbortedRunError(
          fmt::format("state diverged at t={:.6g} (step {} of {})", next.t, k, steps), state,
          std::move(traj));
    }
    state = std::move(next);
    if (k % config.stride == 0 || k == steps) traj.Append(MakeRecord(state, config, f, schedule));
  }
  return traj;
}

}  // namespace tikdyn
