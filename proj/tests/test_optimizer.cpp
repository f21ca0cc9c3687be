#include <doctest.h>

#include <cmath>

#include "cachehier/optimizer.hpp"
#include "test_support.hpp"

using namespace cachehier;
using doctest::Approx;

namespace {

ConstraintSet area_limit(double a) {
  ConstraintSet c;
  c.a_max = a;
  return c;
}

ConfigResult fake(Depth d, double objective, bool feasible = true) {
  ConfigResult r;
  r.depth = d;
  r.verdict = feasible ? Verdict::Optimal : Verdict::Infeasible;
  r.objective = objective;
  return r;
}

}  // namespace

TEST_CASE("constraint functions") {
  TechParams p = testing::reference_params();
  p.rho = 0.5;
  const auto pt = HierarchyPoint::three_level(4.0, 16.0, 64.0);
  CHECK(power_of(pt, p) == Approx(7.0));
  CHECK(area_of(HierarchyPoint::three_level(10.0, 30.0, 60.0)) == Approx(100.0));
  CHECK(area_of(HierarchyPoint::one_level(10.0)) == Approx(10.0));

  const auto v1 = constraint_values(HierarchyPoint::one_level(5.0), p);
  CHECK(v1.m_s == 0.0);
  CHECK(v1.m_d == Approx(amat(HierarchyPoint::one_level(5.0), p).m_d));
  const auto v3 = constraint_values(pt, p);
  CHECK(v3.get(ConstraintId::Noc) == Approx(amat(pt, p).m_s));
  CHECK(v3.get(ConstraintId::Power) == Approx(7.0));
}

TEST_CASE("constraint set validation") {
  ConstraintSet c;
  c.validate();
  c.p_max = 0.0;
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("p_max"));
  c.p_max = 1.0;
  c.m_s_max = -1.0;
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("m_s_max"));
}

TEST_CASE("minimum increments") {
  const TechParams p = testing::reference_params();
  for (const Depth d : kAllDepths) {
    const auto lb = min_increments(d, p);
    const auto want = testing::min_sizes(d, p);
    for (int k = 0; k < 3; ++k) CHECK(lb[k] == Approx(want[k]));
  }
}

TEST_CASE("unconstrained single level matches a scan") {
  const TechParams p = testing::reference_params();
  const auto r = optimize_config(Depth::OneLevel, p, {});
  REQUIRE(r.feasible());
  CHECK(r.active.empty());
  for (double m : r.multipliers.constraint) CHECK(m == 0.0);
  CHECK(r.kkt.passes());

  double best = INFINITY;
  for (double x = std::log(0.5); x < std::log(1e5); x += 1e-4)
    best = std::min(best, amat(HierarchyPoint::one_level(std::exp(x)), p).amat);
  CHECK(r.objective <= best * (1.0 + 1e-9));
  CHECK(r.objective >= best * (1.0 - 1e-6));
}

TEST_CASE("binding area limit") {
  const TechParams p = testing::reference_params();
  const auto r = optimize_config(Depth::OneLevel, p, area_limit(5.0));
  REQUIRE(r.feasible());
  CHECK(r.point.a1 == Approx(5.0).epsilon(1e-9));
  REQUIRE(r.active.size() == 1);
  CHECK(r.active[0] == ConstraintId::Area);
  const double lambda = r.multipliers.constraint[static_cast<int>(ConstraintId::Area)];
  CHECK(lambda > 0.0);
  CHECK(lambda == Approx(-testing::central_difference(r.point, 0, p)).epsilon(1e-6));
  CHECK(r.kkt.passes());
  CHECK(kkt_residual(r.point, r.multipliers, p, area_limit(5.0)).stationarity < 1e-5);
}

TEST_CASE("three-level optimum satisfies the KKT gates") {
  const TechParams p = testing::reference_params();
  const auto r = optimize_config(Depth::ThreeLevel, p, area_limit(100.0));
  REQUIRE(r.feasible());
  CHECK(r.kkt.passes());
  CHECK(r.values.area <= 100.0 * (1.0 + 1e-9));
  CHECK(r.point.a1 < r.point.a2);
  CHECK(r.point.a2 < r.point.a3);
}

TEST_CASE("the KKT residual rejects a perturbed point") {
  const TechParams p = testing::reference_params();
  const ConstraintSet c = area_limit(100.0);
  const auto r = optimize_config(Depth::ThreeLevel, p, c);
  REQUIRE(r.feasible());
  auto moved = r.point;
  moved.a1 *= 1.05;
  moved.a2 *= 0.97;
  moved.a3 *= 0.98;
  const auto k = kkt_residual(moved, r.multipliers, p, c);
  CHECK_FALSE(k.passes());

  Multipliers zero;
  CHECK_FALSE(kkt_residual(r.point, zero, p, c).passes());

  auto outside = r.point;
  outside.a3 *= 1.1;
  CHECK(kkt_residual(outside, r.multipliers, p, c).primal_violation > 1e-3);
}

TEST_CASE("looser limits never make the optimum worse") {
  const TechParams p = testing::reference_params();
  for (const Depth d : kAllDepths) {
    double prev = INFINITY;
    for (double a : {8.0, 16.0, 40.0, 100.0, 400.0}) {
      const auto r = optimize_config(d, p, area_limit(a));
      if (!r.feasible()) continue;
      CHECK(r.objective <= prev * (1.0 + 1e-9));
      prev = r.objective;
    }
  }
}

TEST_CASE("infeasible limits") {
  const TechParams p = testing::reference_params();
  ConstraintSet c;
  c.p_max = 0.1;
  const auto r = optimize(p, c);
  CHECK(r.verdict == Verdict::Infeasible);
  for (const auto& cfg : r.per_config) CHECK_FALSE(cfg.feasible());
  REQUIRE_FALSE(r.warnings.empty());
}

TEST_CASE("winner selection") {
  OptimizationResult r;
  r.per_config = {fake(Depth::OneLevel, 5.0), fake(Depth::TwoLevel, 4.0),
                  fake(Depth::ThreeLevel, 4.5)};
  select_winner(r);
  CHECK(r.verdict == Verdict::Optimal);
  CHECK(r.winner == Depth::TwoLevel);
  CHECK_FALSE(r.boundary.any());

  r.per_config[1].verdict = Verdict::Infeasible;
  select_winner(r);
  CHECK(r.winner == Depth::ThreeLevel);

  r.per_config = {fake(Depth::OneLevel, 4.0), fake(Depth::TwoLevel, 4.0 * (1.0 - 1e-12)),
                  fake(Depth::ThreeLevel, 9.0)};
  select_winner(r);
  CHECK(r.winner == Depth::OneLevel);
  CHECK(r.boundary.d1_eq_d12);
  CHECK_FALSE(r.boundary.d12_eq_d123);

  r.per_config = {fake(Depth::OneLevel, 1.0, false), fake(Depth::TwoLevel, 2.0, false),
                  fake(Depth::ThreeLevel, 3.0, false)};
  select_winner(r);
  CHECK(r.verdict == Verdict::Infeasible);
}

TEST_CASE("results do not depend on the thread count") {
  const TechParams p = testing::reference_params();
  const ConstraintSet c = area_limit(100.0);
  SolverOptions one, many;
  many.threads = 3;
  const auto a = optimize(p, c, one);
  const auto b = optimize(p, c, many);
  REQUIRE(a.verdict == b.verdict);
  CHECK(a.winner == b.winner);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.per_config[i].objective == b.per_config[i].objective);
    CHECK(a.per_config[i].point == b.per_config[i].point);
  }
}
