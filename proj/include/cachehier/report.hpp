#pragma once

#include <string>
#include <vector>

#include "cachehier/config.hpp"
#include "cachehier/optimizer.hpp"

namespace cachehier {

/// Human-readable delay breakdown and constraint values of one point.
std::string format_eval(const HierarchyPoint& point, const TechParams& p, const ConstraintSet& c);

/// Human-readable summary of an optimization, one block per depth.
std::string format_optimization(const OptimizationResult& r);

struct SweepRow {
  double budget = 0.0;
  OptimizationResult result;
};

/// Solves every sweep step (concurrently when options.threads > 1). Rows are
/// returned in sweep order and do not depend on the thread count.
std::vector<SweepRow> run_sweep(const ScenarioConfig& config, const SolverOptions& options);

inline constexpr const char* kSweepCsvHeader =
    "budget,winner_depth,winner_objective,a1,a2,a3,frac_l1,frac_l2,frac_l3,"
    "d1_objective,d1_feasible,d12_objective,d12_feasible,d123_objective,d123_feasible,"
    "active_constraints,boundary,status";

/// CSV with a `#` provenance header (tool version, config hash, sweep spec)
/// followed by kSweepCsvHeader and one row per step.
std::string sweep_csv(const ScenarioConfig& config, const std::vector<SweepRow>& rows);

}  // namespace cachehier
