#include "tikdyn/prox.hpp"

#include <cmath>
#include <string>

#include "tikdyn/error.hpp"

namespace tikdyn {
namespace {

void RequirePositive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    Throw(ErrorCode::kInvalidParameter, std::string(what) + " must be positive and finite");
  }
}

template <typename Fn>
long double GoldenSection(Fn&& fn, long double lo, long double hi, long double width) {
  const long double inv_phi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double a = lo;
  long double b = hi;
  long double c = b - inv_phi * (b - a);
  long double d = a + inv_phi * (b - a);
  long double fc = fn(c);
  long double fd = fn(d);
  while (b - a > width) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5L * (a + b);
}

}  // namespace

Vector Prox(const ProxObjective& f, double s, const Vector& x) {
  RequirePositive(s, "prox step");
  Require(static_cast<std::size_t>(x.size()) == f.dimension(), ErrorCode::kInvalidParameter,
          "prox: dimension mismatch");
  Vector p = f.ProxStep(s, x);
  RequireFinite(p, "prox result");
  if (!std::isfinite(f.Value(p))) {
    Throw(ErrorCode::kDomain, std::string(f.name()) + ": prox returned a point outside the domain");
  }
  return p;
}

Envelope EvaluateEnvelope(const ProxObjective& f, double lambda, const Vector& x) {
  RequirePositive(lambda, "envelope index");
  Envelope e;
  e.prox = Prox(f, lambda, x);
  e.value = f.Value(e.prox) + (x - e.prox).squaredNorm() / (2.0 * lambda);
  e.grad = (x - e.prox) / lambda;
  return e;
}

double MoreauValue(const ProxObjective& f, double lambda, const Vector& x) {
  return EvaluateEnvelope(f, lambda, x).value;
}

Vector MoreauGrad(const ProxObjective& f, double lambda, const Vector& x) {
  RequirePositive(lambda, "envelope index");
  return (x - Prox(f, lambda, x)) / lambda;
}

Vector NumericProxOracle(const ProxObjective& f, double s, const Vector& x) {
  RequirePositive(s, "prox step");
  Require(static_cast<std::size_t>(x.size()) == f.dimension(), ErrorCode::kInvalidParameter,
          "numeric prox: dimension mismatch");
  const bool separable = f.separable();
  if (!separable && f.dimension() != 1) {
    Throw(ErrorCode::kUnsupportedObjective,
          std::string(f.name()) + ": numeric prox oracle needs a separable or 1-D objective");
  }
  constexpr long double kWidth = 1e-10L;
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const long double xi = x[i];
    const long double ls = s;
    auto objective = [&](long double y) {
      long double v;
      if (separable) {
        v = f.CoordinateValue(static_cast<std::size_t>(i), y);
      } else {
        Vector p(1);
        p[0] = static_cast<double>(y);
        v = f.Value(p);
      }
      return v + (xi - y) * (xi - y) / (2.0L * ls);
    };
    const long double half = 10.0L * ls * (1.0L + std::fabs(xi));
    out[i] = static_cast<double>(GoldenSection(objective, xi - half, xi + half, kWidth));
  }
  return out;
}

double EnvelopeOfEnvelope(const ProxObjective& f, double lambda, double mu, const Vector& x) {
  RequirePositive(lambda, "envelope index");
  RequirePositive(mu, "outer envelope index");
  return MoreauValue(f, lambda + mu, x);
}

Vector ProxOfEnvelope(const ProxObjective& f, double lambda, double mu, const Vector& x) {
  RequirePositive(lambda, "envelope index");
  RequirePositive(mu, "prox step");
  const double total = lambda + mu;
  return (lambda / total) * x + (mu / total) * Prox(f, total, x);
}

double ProxIndexPerturbationGap(const ProxObjective& f, double lambda, double mu,
                                const Vector& x) {
  return (Prox(f, lambda, x) - Prox(f, mu, x)).norm();
}

}  // namespace tikdyn
