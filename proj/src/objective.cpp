#include "tikdyn/objective.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "tikdyn/error.hpp"

namespace tikdyn {
namespace {

double Sign(double x) { return (x > 0.0) - (x < 0.0); }

double SoftThreshold(double x, double s) { return Sign(x) * std::max(std::abs(x) - s, 0.0); }

}  // namespace

long double ProxObjective::CoordinateValue(std::size_t, long double) const {
  Throw(ErrorCode::kUnsupportedObjective,
        std::string(name()) + " is not separable; no coordinate access");
}

double ProxObjective::BranchDistance(double, const Vector&) const {
  return std::numeric_limits<double>::infinity();
}

SeparableObjective::SeparableObjective(std::size_t dimension)
    : minimal_norm_point_(Vector::Zero(static_cast<Eigen::Index>(dimension))),
      dimension_(dimension) {
  Require(dimension > 0, ErrorCode::kInvalidParameter, "objective dimension must be positive");
}

double SeparableObjective::Value(const Vector& x) const {
  Require(static_cast<std::size_t>(x.size()) == dimension_, ErrorCode::kInvalidParameter,
          "objective value: dimension mismatch");
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < x.size(); ++i) total += Term(i, x[i]);
  return static_cast<double>(total);
}

Vector SeparableObjective::ProxStep(double s, const Vector& x) const {
  Require(static_cast<std::size_t>(x.size()) == dimension_, ErrorCode::kInvalidParameter,
          "prox: dimension mismatch");
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = TermProx(i, s, x[i]);
  return out;
}

double SeparableObjective::OptimalValue() const {
  return Value(minimal_norm_point_);
}

double SeparableObjective::BranchDistance(double s, const Vector& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (double b : TermBreakpoints(i, s)) best = std::min(best, std::abs(x[i] - b));
  }
  return best;
}

AbsObjective::AbsObjective(std::size_t dimension) : SeparableObjective(dimension) {}

long double AbsObjective::Term(std::size_t, long double y) const { return std::fabs(y); }

double AbsObjective::TermProx(std::size_t, double s, double x) const {
  return SoftThreshold(x, s);
}

std::vector<double> AbsObjective::TermBreakpoints(std::size_t, double s) const {
  return {-s, s};
}

AbsQuadObjective::AbsQuadObjective(std::size_t dimension) : SeparableObjective(dimension) {}

long double AbsQuadObjective::Term(std::size_t, long double y) const {
  return std::fabs(y) + 0.5L * y * y;
}

// Stationarity of |y| + y^2/2 + (x - y)^2/(2s) off the kink gives
// y (1 + s) = x - s sign(y).
double AbsQuadObjective::TermProx(std::size_t, double s, double x) const {
  return SoftThreshold(x, s) / (1.0 + s);
}

std::vector<double> AbsQuadObjective::TermBreakpoints(std::size_t, double s) const {
  return {-s, s};
}

DeadZoneObjective::DeadZoneObjective(std::size_t dimension) : SeparableObjective(dimension) {}

long double DeadZoneObjective::Term(std::size_t, long double y) const {
  return std::max(std::fabs(y) - 1.0L, 0.0L);
}

// Three regimes: inside the flat box the point is already optimal, within s
// of the box it snaps to the boundary, farther out it moves by s.
double DeadZoneObjective::TermProx(std::size_t, double s, double x) const {
  const double r = std::abs(x);
  if (r <= 1.0) return x;
  if (r <= 1.0 + s) return Sign(x);
  return x - s * Sign(x);
}

std::vector<double> DeadZoneObjective::TermBreakpoints(std::size_t, double s) const {
  return {-1.0 - s, -1.0, 1.0, 1.0 + s};
}

ShiftedAbsObjective::ShiftedAbsObjective(std::size_t dimension)
    : SeparableObjective(dimension) {
  minimal_norm_point_.setOnes();
}

long double ShiftedAbsObjective::Term(std::size_t, long double y) const {
  return std::fabs(y - 1.0L);
}

double ShiftedAbsObjective::TermProx(std::size_t, double s, double x) const {
  return 1.0 + SoftThreshold(x - 1.0, s);
}

std::vector<double> ShiftedAbsObjective::TermBreakpoints(std::size_t, double s) const {
  return {1.0 - s, 1.0 + s};
}

QuadraticObjective::QuadraticObjective(Vector center)
    : SeparableObjective(static_cast<std::size_t>(center.size())), center_(std::move(center)) {
  RequireFinite(center_, "quadratic center");
  minimal_norm_point_ = center_;
}

long double QuadraticObjective::Term(std::size_t i, long double y) const {
  const long double r = y - center_[static_cast<Eigen::Index>(i)];
  return 0.5L * r * r;
}

double QuadraticObjective::TermProx(std::size_t i, double s, double x) const {
  return (x + s * center_[static_cast<Eigen::Index>(i)]) / (1.0 + s);
}

FunctionObjective::FunctionObjective(std::string name, std::size_t dimension, ValueFn value,
                                     ProxFn prox, Vector minimal_norm_point,
                                     double optimal_value)
    : name_(std::move(name)),
      dimension_(dimension),
      value_(std::move(value)),
      prox_(std::move(prox)),
      minimal_norm_point_(std::move(minimal_norm_point)),
      optimal_value_(optimal_value) {
  Require(dimension_ > 0, ErrorCode::kInvalidParameter, "objective dimension must be positive");
  Require(static_cast<std::size_t>(minimal_norm_point_.size()) == dimension_,
          ErrorCode::kInvalidParameter, "minimal-norm point has wrong dimension");
  Require(value_ && prox_, ErrorCode::kInvalidParameter, "objective oracles must be set");
}

ObjectivePtr MakeObjective(std::string_view name, std::size_t dimension) {
  Require(dimension > 0, ErrorCode::kInvalidParameter, "objective dimension must be positive");
  if (name == "abs") return std::make_shared<AbsObjective>(dimension);
  if (name == "abs_quad") return std::make_shared<AbsQuadObjective>(dimension);
  if (name == "dead_zone") return std::make_shared<DeadZoneObjective>(dimension);
  if (name == "shifted_abs") return std::make_shared<ShiftedAbsObjective>(dimension);
  if (name == "quadratic") {
    return std::make_shared<QuadraticObjective>(
        Vector::Ones(static_cast<Eigen::Index>(dimension)));
  }
  Throw(ErrorCode::kUnsupportedObjective, "unknown objective '" + std::string(name) + "'");
}

const std::vector<std::string>& CatalogNames() {
  static const std::vector<std::string> names = {"abs", "abs_quad", "dead_zone", "shifted_abs",
                                                 "quadratic"};
  return names;
}

}  // namespace tikdyn
