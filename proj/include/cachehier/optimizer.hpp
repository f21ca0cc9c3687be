#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cachehier/models.hpp"
#include "cachehier/params.hpp"

namespace cachehier {

/// Resource limits; an absent limit is disabled.
struct ConstraintSet {
  std::optional<double> p_max;    ///< power budget
  std::optional<double> m_d_max;  ///< off-chip DRAM access-rate limit
  std::optional<double> a_max;    ///< total area budget
  std::optional<double> m_s_max;  ///< NoC capacity as a shared-cache access-rate limit

  void validate() const;
  bool operator==(const ConstraintSet&) const = default;
};

enum class ConstraintId : int { Power = 0, OffChip = 1, Area = 2, Noc = 3 };
inline constexpr int kConstraintCount = 4;
inline constexpr std::array<ConstraintId, kConstraintCount> kAllConstraints = {
    ConstraintId::Power, ConstraintId::OffChip, ConstraintId::Area, ConstraintId::Noc};

std::string_view to_string(ConstraintId id);
std::optional<double> limit_of(const ConstraintSet& c, ConstraintId id);

/// g1..g4 evaluated at one point.
struct ConstraintValues {
  double power = 0.0;  // g1
  double m_d = 0.0;    // g2
  double area = 0.0;   // g3
  double m_s = 0.0;    // g4, zero for a single private level

  double get(ConstraintId id) const;
};

ConstraintValues constraint_values(const HierarchyPoint& point, const TechParams& p);

/// KKT multipliers in the units of the original constraints: `constraint[j]`
/// multiplies g_j - L_j, `lower_bound[i]` multiplies min_increment_i - delta_i.
struct Multipliers {
  std::array<double, kConstraintCount> constraint{};
  std::array<double, 3> lower_bound{};
};

struct KktTolerances {
  double stationarity = 1e-6;
  double primal = 1e-9;
  double complementarity = 1e-6;
};

/// First-order optimality residuals of a candidate, computed by central
/// finite differences of the Lagrangian over the cumulative areas.
///
/// stationarity    max_j |A_j * dL/dA_j| / max(|D|, 1)
/// primal          max relative violation (g_j - L_j) / L_j, including the
///                 per-level minimum effective sizes
/// complementarity max |lambda_j * (g_j - L_j)| / max(|D|, 1)
struct KktReport {
  double stationarity = 0.0;
  double primal_violation = 0.0;
  double complementarity = 0.0;
  double min_multiplier = 0.0;

  bool passes(const KktTolerances& tol = {}) const;
};

/// Lower bound on each level's effective size: the size at which its miss
/// rate law reaches 1. Unused levels report 0.
std::array<double, 3> min_increments(Depth depth, const TechParams& p);

KktReport kkt_residual(const HierarchyPoint& point, const Multipliers& multipliers,
                       const TechParams& p, const ConstraintSet& c);

enum class Verdict { Optimal, Infeasible };

std::string_view to_string(Verdict v);

struct ConfigResult {
  Depth depth = Depth::OneLevel;
  Verdict verdict = Verdict::Infeasible;
  HierarchyPoint point;
  double objective = 0.0;
  ConstraintValues values;
  std::vector<ConstraintId> active;
  std::array<bool, 3> at_min_size{};  // level sits on its minimum effective size
  Multipliers multipliers;
  KktReport kkt;
  bool degenerate = false;
  std::string diagnostic;

  bool feasible() const { return verdict == Verdict::Optimal; }
};

/// Which equalities among D_1, D_12, D_123 hold at the winning objective.
struct BoundaryFlags {
  bool d1_eq_d12 = false;
  bool d1_eq_d123 = false;
  bool d12_eq_d123 = false;

  bool any() const { return d1_eq_d12 || d1_eq_d123 || d12_eq_d123; }
};

struct OptimizationResult {
  Verdict verdict = Verdict::Infeasible;
  Depth winner = Depth::OneLevel;
  std::array<ConfigResult, 3> per_config;
  BoundaryFlags boundary;
  std::vector<std::string> warnings;

  const ConfigResult& best() const { return per_config[levels(winner) - 1]; }
};

struct SolverOptions {
  std::uint64_t seed = 1;      // extra randomized starts
  int threads = 1;             // >1 solves the three depths concurrently
  int seeds_per_dim = 7;       // log-spaced start grid per area variable
  int grid_starts = 4;         // best feasible grid seeds refined locally
  int random_starts = 2;       // jittered copies of the best seed
  double tie_tolerance = 1e-9; // relative gap treated as an equality boundary
  KktTolerances kkt;
};

/// Constrained minimum of one depth's average memory delay.
ConfigResult optimize_config(Depth depth, const TechParams& p, const ConstraintSet& c,
                             const SolverOptions& options = {});

/// Best hierarchy over all three depths. Ties within `tie_tolerance` go to the
/// shallower hierarchy and are reported in `boundary`.
OptimizationResult optimize(const TechParams& p, const ConstraintSet& c,
                            const SolverOptions& options = {});

/// Sets verdict, winner, boundary and warnings from an already filled per_config.
void select_winner(OptimizationResult& r, const SolverOptions& options = {});

}  // namespace cachehier
