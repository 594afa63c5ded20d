#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tikdyn/vector.hpp"

namespace tikdyn {

// A proper, convex, lower semicontinuous objective accessed only through a
// value oracle and an exact proximal-step oracle. Instances are immutable
// and may be shared between threads.
class ProxObjective {
 public:
  virtual ~ProxObjective() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t dimension() const = 0;

  // Extended-real value; +infinity outside the domain.
  virtual double Value(const Vector& x) const = 0;

  // Unchecked proximal step argmin_y { Phi(y) + |x - y|^2 / (2 s) }.
  // Callers should go through tikdyn::Prox, which validates the result.
  virtual Vector ProxStep(double s, const Vector& x) const = 0;

  // Least-norm element of argmin Phi, and the optimal value.
  virtual const Vector& MinimalNormPoint() const = 0;
  virtual double OptimalValue() const = 0;

  // Separable objectives are sums of one-dimensional terms; the numeric
  // prox oracle needs per-coordinate access to them.
  virtual bool separable() const { return false; }
  virtual long double CoordinateValue(std::size_t i, long double y) const;

  // Distance from x to the nearest point where the prox of index s changes
  // branch. +infinity for objectives whose prox has no branch structure.
  virtual double BranchDistance(double s, const Vector& x) const;
};

using ObjectivePtr = std::shared_ptr<const ProxObjective>;

// Coordinate-wise sum of a scalar term with a closed-form scalar prox.
class SeparableObjective : public ProxObjective {
 public:
  explicit SeparableObjective(std::size_t dimension);

  std::size_t dimension() const override { return dimension_; }
  double Value(const Vector& x) const override;
  Vector ProxStep(double s, const Vector& x) const override;
  const Vector& MinimalNormPoint() const override { return minimal_norm_point_; }
  double OptimalValue() const override;
  bool separable() const override { return true; }
  long double CoordinateValue(std::size_t i, long double y) const override {
    return Term(i, y);
  }
  double BranchDistance(double s, const Vector& x) const override;

 protected:
  virtual long double Term(std::size_t i, long double y) const = 0;
  virtual double TermProx(std::size_t i, double s, double x) const = 0;
  // Scalar inputs at which TermProx(i, s, .) switches formula.
  virtual std::vector<double> TermBreakpoints(std::size_t i, double s) const = 0;

  Vector minimal_norm_point_;

 private:
  std::size_t dimension_;
};

// Phi(x) = sum |x_i|
class AbsObjective final : public SeparableObjective {
 public:
  explicit AbsObjective(std::size_t dimension);
  std::string_view name() const override { return "abs"; }

 protected:
  long double Term(std::size_t, long double y) const override;
  double TermProx(std::size_t, double s, double x) const override;
  std::vector<double> TermBreakpoints(std::size_t, double s) const override;
};

// Phi(x) = sum |x_i| + x_i^2 / 2
class AbsQuadObjective final : public SeparableObjective {
 public:
  explicit AbsQuadObjective(std::size_t dimension);
  std::string_view name() const override { return "abs_quad"; }

 protected:
  long double Term(std::size_t, long double y) const override;
  double TermProx(std::size_t, double s, double x) const override;
  std::vector<double> TermBreakpoints(std::size_t, double s) const override;
};

// Phi(x) = sum max(|x_i| - 1, 0); argmin is the box [-1, 1]^n.
class DeadZoneObjective final : public SeparableObjective {
 public:
  explicit DeadZoneObjective(std::size_t dimension);
  std::string_view name() const override { return "dead_zone"; }

 protected:
  long double Term(std::size_t, long double y) const override;
  double TermProx(std::size_t, double s, double x) const override;
  std::vector<double> TermBreakpoints(std::size_t, double s) const override;
};

// Phi(x) = sum |x_i - 1|
class ShiftedAbsObjective final : public SeparableObjective {
 public:
  explicit ShiftedAbsObjective(std::size_t dimension);
  std::string_view name() const override { return "shifted_abs"; }

 protected:
  long double Term(std::size_t, long double y) const override;
  double TermProx(std::size_t, double s, double x) const override;
  std::vector<double> TermBreakpoints(std::size_t, double s) const override;
};

// Phi(x) = |x - b|^2 / 2
class QuadraticObjective final : public SeparableObjective {
 public:
  explicit QuadraticObjective(Vector center);
  std::string_view name() const override { return "quadratic"; }
  const Vector& center() const { return center_; }

 protected:
  long double Term(std::size_t i, long double y) const override;
  double TermProx(std::size_t i, double s, double x) const override;
  std::vector<double> TermBreakpoints(std::size_t, double) const override { return {}; }

 private:
  Vector center_;
};

// Objective assembled from user-supplied oracles. Not separable, so the
// numeric prox oracle only supports it in dimension one.
class FunctionObjective final : public ProxObjective {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using ProxFn = std::function<Vector(double, const Vector&)>;

  FunctionObjective(std::string name, std::size_t dimension, ValueFn value, ProxFn prox,
                    Vector minimal_norm_point, double optimal_value);

  std::string_view name() const override { return name_; }
  std::size_t dimension() const override { return dimension_; }
  double Value(const Vector& x) const override { return value_(x); }
  Vector ProxStep(double s, const Vector& x) const override { return prox_(s, x); }
  const Vector& MinimalNormPoint() const override { return minimal_norm_point_; }
  double OptimalValue() const override { return optimal_value_; }

 private:
  std::string name_;
  std::size_t dimension_;
  ValueFn value_;
  ProxFn prox_;
  Vector minimal_norm_point_;
  double optimal_value_;
};

// Catalog lookup by name: "abs", "abs_quad", "dead_zone", "shifted_abs",
// "quadratic" (centered at the all-ones vector). Unknown names throw
// kUnsupportedObjective.
ObjectivePtr MakeObjective(std::string_view name, std::size_t dimension);

const std::vector<std::string>& CatalogNames();

}  // namespace tikdyn
