#include <algorithm>
#include <cmath>
#include <limits>

#include "cachehier/optimizer.hpp"

namespace cachehier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Lagrangian {
  const TechParams& p;
  const ConstraintSet& c;
  const Multipliers& mult;
  Depth depth;
  std::array<double, 3> lb;

  double operator()(const std::array<double, 3>& a) const {
    const HierarchyPoint pt{depth, a[0], a[1], a[2]};
    const double d = amat(pt, p).amat;
    const ConstraintValues g = constraint_values(pt, p);
    double total = d;
    for (const ConstraintId id : kAllConstraints)
      if (const auto limit = limit_of(c, id))
        total += mult.constraint[static_cast<int>(id)] * (g.get(id) - *limit);
    const auto inc = pt.increments();
    for (int i = 0; i < levels(depth); ++i) total += mult.lower_bound[i] * (lb[i] - inc[i]);
    return total;
  }
};

// Fills unused levels with the deepest used one.
std::array<double, 3> normalized(const std::array<double, 3>& a, int n) {
  std::array<double, 3> out = a;
  for (int k = n; k < 3; ++k) out[k] = out[n - 1];
  return out;
}

}  // namespace

bool KktReport::passes(const KktTolerances& tol) const {
  return stationarity <= tol.stationarity && primal_violation <= tol.primal &&
         complementarity <= tol.complementarity && min_multiplier >= 0.0;
}

KktReport kkt_residual(const HierarchyPoint& point, const Multipliers& multipliers,
                       const TechParams& p, const ConstraintSet& c) {
  point.validate();
  const int n = levels(point.depth);
  const auto lb = min_increments(point.depth, p);
  const Lagrangian lag{p, c, multipliers, point.depth, lb};
  const double d = amat(point, p).amat;
  const double scale = std::max(std::abs(d), 1.0);
  const auto inc = point.increments();

  KktReport r;
  r.min_multiplier = kInf;
  const ConstraintValues g = constraint_values(point, p);
  for (const ConstraintId id : kAllConstraints) {
    const auto limit = limit_of(c, id);
    if (!limit) continue;
    const double lambda = multipliers.constraint[static_cast<int>(id)];
    const double slack = g.get(id) - *limit;
    r.primal_violation = std::max(r.primal_violation, slack / *limit);
    r.complementarity = std::max(r.complementarity, std::abs(lambda * slack) / scale);
    r.min_multiplier = std::min(r.min_multiplier, lambda);
  }
  for (int i = 0; i < n; ++i) {
    const double nu = multipliers.lower_bound[i];
    const double slack = lb[i] - inc[i];
    r.primal_violation = std::max(r.primal_violation, slack / lb[i]);
    r.complementarity = std::max(r.complementarity, std::abs(nu * slack) / scale);
    r.min_multiplier = std::min(r.min_multiplier, nu);
  }
  if (!std::isfinite(d)) {
    r.stationarity = kInf;
    return r;
  }

  const std::array<double, 3> a = {point.a1, point.a2, point.a3};
  for (int j = 0; j < n; ++j) {
    const double h = std::max(1e-6 * a[j], 1e-8);
    // Raising A_j grows level j and shrinks level j+1; avoid stepping either
    // below its minimum size, where the miss law is clamped.
    const bool up_ok = j + 1 >= n || inc[j + 1] - 2.0 * h >= lb[j + 1];
    const bool down_ok = inc[j] - 2.0 * h >= lb[j];
    const auto shifted = [&](double by) {
      auto x = a;
      x[j] += by;
      return lag(normalized(x, n));
    };
    double slope = 0.0;
    if (up_ok == down_ok) {
      slope = (shifted(h) - shifted(-h)) / (2.0 * h);
    } else {
      // Second-order one-sided difference on the admissible side.
      const double s = up_ok ? h : -h;
      slope = (-3.0 * shifted(0.0) + 4.0 * shifted(s) - shifted(2.0 * s)) / (2.0 * s);
    }
    r.stationarity = std::max(r.stationarity, std::abs(a[j] * slope) / scale);
  }
  return r;
}

}  // namespace cachehier
