#pragma once

#include <cstddef>
#include <vector>

#include "cachehier/optimizer.hpp"

namespace cachehier {

/// Log-spaced grid of per-level increments: min_area * 10^(i / points_per_decade)
/// up to max_area. Doubling points_per_decade yields a superset.
struct GridSpec {
  double min_area = 0.0;
  double max_area = 0.0;
  int points_per_decade = 24;

  void validate() const;
  std::vector<double> values() const;
};

/// Grid covering the minimum effective sizes up to the tightest area implied
/// by the area or power limit (or 1e5 alpha when neither is set).
GridSpec default_grid(const TechParams& p, const ConstraintSet& c, int points_per_decade);

struct OracleResult {
  Depth depth = Depth::OneLevel;
  Verdict verdict = Verdict::Infeasible;
  HierarchyPoint point;
  double objective = 0.0;
  std::size_t evaluated = 0;
  std::size_t feasible = 0;
};

/// Exhaustive search of one depth over the grid (increments below a level's
/// minimum effective size are skipped). Ties go to the lowest grid index, so
/// the result does not depend on `threads`.
OracleResult grid_search(Depth depth, const TechParams& p, const ConstraintSet& c,
                         const GridSpec& g, int threads = 1);

struct RefineOptions {
  int starts = 3;       // best distinct grid points refined
  int lattice = 10;     // half-width of the local lattice, in steps
  double min_step = 1e-12;  // in log increment
  // When no grid point is feasible, double points_per_decade up to this many
  // (0 disables) while the grid stays below max_cells points.
  int max_points_per_decade = 0;
  double max_cells = 2e7;
};

/// grid_search followed by a shrinking lattice search in log-increment space
/// around the best few grid points. `evaluated` counts every grid pass.
OracleResult refine_search(Depth depth, const TechParams& p, const ConstraintSet& c,
                           const GridSpec& g, int threads = 1, const RefineOptions& options = {});

}  // namespace cachehier
