#include "tikdyn/vector.hpp"

#include <string>

#include "tikdyn/error.hpp"

namespace tikdyn {

bool AllFinite(const Vector& v) { return v.allFinite(); }

void RequireFinite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    Throw(ErrorCode::kDomain, std::string(what) + ": non-finite entry");
  }
}

void RequireSameDimension(const Vector& a, const Vector& b, std::string_view what) {
  if (a.size() != b.size()) {
    Throw(ErrorCode::kInvalidParameter,
          std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()) + ")");
  }
}

}  // namespace tikdyn
