#include "cachehier/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace cachehier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  double objective = kInf;
  std::size_t index = 0;
  std::array<double, 3> inc{};

  bool operator<(const Candidate& o) const {
    return objective != o.objective ? objective < o.objective : index < o.index;
  }
};

// Objective at a point, or +inf when it violates a limit or saturates.
double feasible_objective(Depth depth, const std::array<double, 3>& inc, const TechParams& p,
                          const ConstraintSet& c) {
  const auto pt = HierarchyPoint::from_increments(depth, std::span<const double>(inc.data(), levels(depth)));
  if (c.a_max && area_of(pt) > *c.a_max) return kInf;
  if (c.p_max && power_of(pt, p) > *c.p_max) return kInf;
  const DelayBreakdown b = amat(pt, p);
  if (c.m_d_max && b.m_d > *c.m_d_max) return kInf;
  if (c.m_s_max && b.m_s > *c.m_s_max) return kInf;
  return std::isfinite(b.amat) ? b.amat : kInf;
}

void keep_best(std::vector<Candidate>& best, const Candidate& cand, std::size_t keep) {
  if (best.size() == keep && !(cand < best.back())) return;
  best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
  if (best.size() > keep) best.pop_back();
}

struct Scan {
  std::vector<Candidate> best;
  std::size_t evaluated = 0;
  std::size_t feasible = 0;
};

Scan scan(Depth depth, const TechParams& p, const ConstraintSet& c, const GridSpec& g,
          int threads, std::size_t keep) {
  g.validate();
  const auto values = g.values();
  const auto lb = min_increments(depth, p);
  const int n = levels(depth);
  std::array<std::vector<std::size_t>, 3> axis;
  for (int k = 0; k < n; ++k)
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] >= lb[k]) axis[k].push_back(i);
  for (int k = n; k < 3; ++k) axis[k] = {0};
  const std::size_t width = values.size();

  const std::size_t outer = axis[0].size();
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(outer)));
  std::vector<Scan> parts(workers);
  const auto work = [&](int w) {
    Scan& s = parts[w];
    for (std::size_t i0 = w; i0 < outer; i0 += workers)
      for (std::size_t i1 : axis[1])
        for (std::size_t i2 : axis[2]) {
          const std::array<std::size_t, 3> idx = {axis[0][i0], i1, i2};
          Candidate cand;
          cand.index = (idx[0] * width + idx[1]) * width + idx[2];
          for (int k = 0; k < n; ++k) cand.inc[k] = values[idx[k]];
          cand.objective = feasible_objective(depth, cand.inc, p, c);
          ++s.evaluated;
          if (!std::isfinite(cand.objective)) continue;
          ++s.feasible;
          keep_best(s.best, cand, keep);
        }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  Scan total;
  for (const auto& s : parts) {
    total.evaluated += s.evaluated;
    total.feasible += s.feasible;
    for (const auto& cand : s.best) keep_best(total.best, cand, keep);
  }
  return total;
}

OracleResult to_result(Depth depth, const Candidate& best, const Scan& s) {
  OracleResult r;
  r.depth = depth;
  r.evaluated = s.evaluated;
  r.feasible = s.feasible;
  if (!std::isfinite(best.objective)) return r;
  r.verdict = Verdict::Optimal;
  r.objective = best.objective;
  r.point = HierarchyPoint::from_increments(depth, std::span<const double>(best.inc.data(), levels(depth)));
  return r;
}

}  // namespace

void GridSpec::validate() const {
  if (!(min_area > 0.0) || !std::isfinite(min_area)) throw DomainError("grid min_area must be > 0");
  if (!(max_area > min_area) || !std::isfinite(max_area))
    throw DomainError("grid max_area must exceed min_area");
  if (points_per_decade < 8) throw DomainError("grid points_per_decade must be >= 8");
}

std::vector<double> GridSpec::values() const {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = min_area * std::pow(10.0, static_cast<double>(i) / points_per_decade);
    if (v > max_area * (1.0 + 1e-12)) break;
    out.push_back(v);
  }
  return out;
}

GridSpec default_grid(const TechParams& p, const ConstraintSet& c, int points_per_decade) {
  GridSpec g;
  g.points_per_decade = points_per_decade;
  g.min_area = std::min(min_private_increment(p), min_shared_increment(p));
  double top = kInf;
  if (c.a_max) top = std::min(top, *c.a_max);
  if (c.p_max) top = std::min(top, p.alpha * (*c.p_max / p.rho) * (*c.p_max / p.rho));
  if (!std::isfinite(top)) top = 1e5 * p.alpha;
  g.max_area = std::max(top, g.min_area * 10.0);
  return g;
}

OracleResult grid_search(Depth depth, const TechParams& p, const ConstraintSet& c,
                         const GridSpec& g, int threads) {
  const Scan s = scan(depth, p, c, g, threads, 1);
  return to_result(depth, s.best.empty() ? Candidate{} : s.best.front(), s);
}

OracleResult refine_search(Depth depth, const TechParams& p, const ConstraintSet& c,
                           const GridSpec& g, int threads, const RefineOptions& options) {
  const auto keep = static_cast<std::size_t>(std::max(1, options.starts));
  GridSpec grid = g;
  Scan s = scan(depth, p, c, grid, threads, keep);
  while (s.best.empty() && grid.points_per_decade * 2 <= options.max_points_per_decade) {
    grid.points_per_decade *= 2;
    const double cells = std::pow(static_cast<double>(grid.values().size()), levels(depth));
    if (cells > options.max_cells) break;
    const std::size_t evaluated = s.evaluated;
    s = scan(depth, p, c, grid, threads, keep);
    s.evaluated += evaluated;
  }
  if (s.best.empty()) return to_result(depth, Candidate{}, s);

  const int n = levels(depth);
  const auto lb = min_increments(depth, p);
  const int half = std::max(1, options.lattice);
  const int side = 2 * half + 1;
  int cells = 1;
  for (int k = 0; k < n; ++k) cells *= side;

  Candidate overall = s.best.front();
  for (const Candidate& start : s.best) {
    std::array<double, 3> center{};
    for (int k = 0; k < n; ++k) center[k] = std::log(start.inc[k]);
    double best_value = start.objective;
    std::array<double, 3> best_inc = start.inc;
    double step = std::log(10.0) / grid.points_per_decade;
    for (int iter = 0; iter < 2000 && step > options.min_step; ++iter) {
      std::array<double, 3> best_y = center;
      std::array<double, 3> moved_inc{};
      bool moved = false;
      for (int cell = 0; cell < cells; ++cell) {
        std::array<double, 3> y = center;
        std::array<double, 3> inc{};
        int rest = cell;
        bool valid = true;
        for (int k = 0; k < n; ++k) {
          y[k] += step * (rest % side - half);
          rest /= side;
          inc[k] = std::exp(y[k]);
          if (inc[k] < lb[k]) valid = false;
        }
        if (!valid) continue;
        const double v = feasible_objective(depth, inc, p, c);
        if (v < best_value) {
          best_value = v;
          best_y = y;
          moved_inc = inc;
          moved = true;
        }
      }
      if (moved) {
        center = best_y;
        best_inc = moved_inc;
      } else {
        step /= 2.0;
      }
    }
    Candidate refined;
    refined.objective = best_value;
    refined.index = start.index;
    refined.inc = best_inc;
    if (refined < overall) overall = refined;
  }
  return to_result(depth, overall, s);
}

}  // namespace cachehier
