#pragma once

#include <algorithm>
#include <cmath>

namespace otq {

/// Outcome of checking lhs ≤ rhs.
struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  /// rhs − lhs
  double slack = 0.0;

  static BoundCheck of(double lhs, double rhs) {
    BoundCheck c;
    c.lhs = lhs;
    c.rhs = rhs;
    c.slack = rhs - lhs;
    c.satisfied = lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
    return c;
  }
};

}  // namespace otq
