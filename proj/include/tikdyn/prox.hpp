#pragma once

#include "tikdyn/objective.hpp"
#include "tikdyn/vector.hpp"

namespace tikdyn {

// prox_{s f}(x). Throws kInvalidParameter for s <= 0 and kDomain if the
// oracle returns a non-finite point or one with infinite objective value.
Vector Prox(const ProxObjective& f, double s, const Vector& x);

// Moreau envelope f_lambda(x) = f(p) + |x - p|^2 / (2 lambda), p = prox.
double MoreauValue(const ProxObjective& f, double lambda, const Vector& x);

// grad f_lambda(x) = (x - prox_{lambda f}(x)) / lambda.
Vector MoreauGrad(const ProxObjective& f, double lambda, const Vector& x);

// Value and gradient from a single prox evaluation.
struct Envelope {
  Vector prox;
  double value = 0.0;
  Vector grad;
};
Envelope EvaluateEnvelope(const ProxObjective& f, double lambda, const Vector& x);

// Independent prox by per-coordinate golden-section search on
// y -> f_i(y) + (x_i - y)^2 / (2 s), bracket x_i -+ 10 s (1 + |x_i|),
// refined to width 1e-10 in extended precision. Supports separable
// objectives and one-dimensional ones; others throw kUnsupportedObjective.
Vector NumericProxOracle(const ProxObjective& f, double s, const Vector& x);

// (f_lambda)_mu(x), evaluated through (f_lambda)_mu = f_{lambda + mu}.
double EnvelopeOfEnvelope(const ProxObjective& f, double lambda, double mu, const Vector& x);

// prox_{mu f_lambda}(x) = lambda/(lambda+mu) x + mu/(lambda+mu) prox_{(lambda+mu) f}(x).
Vector ProxOfEnvelope(const ProxObjective& f, double lambda, double mu, const Vector& x);

// |prox_{lambda f}(x) - prox_{mu f}(x)|; bounded by |lambda - mu| |grad f_lambda(x)|.
double ProxIndexPerturbationGap(const ProxObjective& f, double lambda, double mu,
                                const Vector& x);

}  // namespace tikdyn
