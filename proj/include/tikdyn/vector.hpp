#pragma once

#include <Eigen/Core>

#include <string_view>

namespace tikdyn {

// State-space element. The dimension is fixed per run.
using Vector = Eigen::VectorXd;

bool AllFinite(const Vector& v);

// Throws kDomain naming `what` if any entry is NaN or infinite.
void RequireFinite(const Vector& v, std::string_view what);

void RequireSameDimension(const Vector& a, const Vector& b, std::string_view what);

}  // namespace tikdyn
