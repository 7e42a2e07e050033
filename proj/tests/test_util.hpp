#pragma once

#include <cmath>
#include <ostream>

namespace testutil {

/// Absolute-tolerance comparison for CHECK(x == abs_approx(v, tol)).
struct AbsApprox {
  double value;
  double tol;
  friend bool operator==(double lhs, const AbsApprox& r) {
    return std::fabs(lhs - r.value) <= r.tol;
  }
  friend bool operator==(const AbsApprox& r, double lhs) { return lhs == r; }
  friend std::ostream& operator<<(std::ostream& os, const AbsApprox& r) {
    return os << r.value << " (+/- " << r.tol << ")";
  }
};

inline AbsApprox abs_approx(double value, double tol) { return {value, tol}; }

}  // namespace testutil

using testutil::abs_approx;
