#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tikdyn/error.hpp"
#include "tikdyn/objective.hpp"
#include "tikdyn/schedule.hpp"
#include "tikdyn/vector.hpp"

namespace tikdyn {

// x'' + alpha sqrt(eps) x' + beta d/dt grad f_lambda(x) + grad f_lambda(x) + eps x = 0
// integrated through its first-order reformulation.
struct SolverConfig {
  double alpha = 10.0;
  double beta = 1.0;
  double t0 = 1.0;
  double horizon = 1000.0;
  double step = 1e-3;
  std::size_t stride = 100;  // record every `stride` steps
  Vector x0;
  Vector v0;

  // Throws kInvalidParameter on inconsistent values.
  void Validate() const;
};

// w is the auxiliary variable y for beta > 0, or the velocity for beta = 0.
struct SolverState {
  double t = 0.0;
  Vector x;
  Vector w;
};

struct StateDerivative {
  Vector dx;
  Vector dw;
};

// beta > 0:
//   x' = -beta grad f_lambda(x) - (alpha sqrt(eps) - 1/beta) x - y/beta
//   y' = -(alpha beta eps'/(2 sqrt(eps)) - beta eps - 1/beta + alpha sqrt(eps)) x - y/beta
// Throws kWrongBranch when beta == 0.
StateDerivative RhsBetaPositive(const SolverState& state, const SolverConfig& config,
                                const ProxObjective& f, const ParamSchedule& schedule);

// beta == 0: x' = y, y' = -alpha sqrt(eps) y - grad f_lambda(x) - eps x.
// Throws kWrongBranch when beta > 0.
StateDerivative RhsBetaZero(const SolverState& state, const SolverConfig& config,
                            const ProxObjective& f, const ParamSchedule& schedule);

// Dispatches on config.beta.
StateDerivative Rhs(const SolverState& state, const SolverConfig& config, const ProxObjective& f,
                    const ParamSchedule& schedule);

// Initial state at t0: w = -beta (v0 + beta grad f_lambda(t0)(x0)) + (1 - alpha beta sqrt(eps(t0))) x0
// for beta > 0, w = v0 otherwise.
SolverState InitialLift(const SolverConfig& config, const ProxObjective& f,
                        const ParamSchedule& schedule);

// Velocity x' recovered from a state.
Vector VelocityOf(const SolverState& state, const SolverConfig& config, const ProxObjective& f,
                  const ParamSchedule& schedule);

struct TrajectoryRecord {
  double t = 0.0;
  Vector x;
  Vector velocity;
  double moreau_value = 0.0;
  double grad_norm = 0.0;
  double phi_gap = 0.0;       // f_lambda(x) - f*
  double reg_distance = 0.0;  // |x - x_{eps,lambda}|; NaN without the Tikhonov term
  double norm_x = 0.0;
};

TrajectoryRecord MakeRecord(const SolverState& state, const SolverConfig& config,
                            const ProxObjective& f, const ParamSchedule& schedule);

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t dimension, double record_spacing)
      : dimension_(dimension), record_spacing_(record_spacing) {}

  void Append(TrajectoryRecord record) { records_.push_back(std::move(record)); }
  void AddWarning(std::string w) { warnings_.push_back(std::move(w)); }

  const std::vector<TrajectoryRecord>& records() const { return records_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t dimension() const { return dimension_; }
  double record_spacing() const { return record_spacing_; }
  const TrajectoryRecord& back() const { return records_.back(); }

  // Named column: "t", "x_<i>", "v_<i>", "moreau_value", "grad_norm",
  // "phi_gap", "reg_distance", "norm_x". Unknown names throw kInvalidParameter.
  std::vector<double> Column(std::string_view name) const;

  // Header plus one row per record, 17 significant digits.
  void WriteCsv(std::ostream& os) const;
  void WriteCsv(const std::string& path) const;

  static std::vector<std::string> ColumnNames(std::size_t dimension);

 private:
  std::size_t dimension_ = 0;
  double record_spacing_ = 0.0;
  std::vector<TrajectoryRecord> records_;
  std::vector<std::string> warnings_;
};

// Raised when the state stops being finite. Carries the last finite state
// and every record written before the failure.
class AbortedRunError : public Error {
 public:
  AbortedRunError(const std::string& what, SolverState last_valid, Trajectory partial)
      : Error(ErrorCode::kAbortedRun, what),
        last_valid_(std::move(last_valid)),
        partial_(std::move(partial)) {}

  const SolverState& last_valid() const { return last_valid_; }
  const Trajectory& partial() const { return partial_; }

 private:
  SolverState last_valid_;
  Trajectory partial_;
};

// Fixed-step classical RK4 from t0 to horizon. The step count is
// (horizon - t0) / step, which must be an integer to 1e-9 relative.
// Records at every multiple of the stride and at the final step.
Trajectory Integrate(const SolverConfig& config, const ProxObjective& f,
                     const ParamSchedule& schedule);

}  // namespace tikdyn
