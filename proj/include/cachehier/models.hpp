#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "cachehier/params.hpp"

namespace cachehier {

/// Which queue, if any, drove a delay to its +inf saturation sentinel.
enum class Saturation { None, Noc, Dram };

std::string_view to_string(Saturation s);

/// Average memory delay of one hierarchy point and its additive parts.
struct DelayBreakdown {
  Depth depth = Depth::OneLevel;
  double amat = 0.0;
  std::vector<double> level_hit_terms;  // (1 - m_i) * prod(upstream m) * t_i
  double dram_term = 0.0;               // prod(m_i) * (d_D + d_Q)
  std::vector<double> miss_rates;
  std::vector<double> access_times;
  double m_s = 0.0;    // shared-level access rate, 0 without a shared level
  double m_d = 0.0;    // off-chip access rate
  double d_noc = 0.0;  // NoC delay on the shared level, 0 without one
  double d_q = 0.0;    // DRAM interconnect queuing delay
  bool degenerate = false;  // some miss rate was clamped to 1
  Saturation saturated = Saturation::None;
};

// Access times.
double access_time_private(double area, const TechParams& p);
/// Shared level of effective size cumulative_area - prev_cumulative_area,
/// reached through the NoC at shared access rate `m_s`.
double access_time_shared(double cumulative_area, double prev_cumulative_area, double m_s,
                          const TechParams& p);

// Miss rates, clamped to 1 where the inverse-square-root law exceeds it.
double miss_rate_private_l1(double a1, const TechParams& p);
double miss_rate_private_inner(double a_curr, double a_prev, const TechParams& p);
double miss_rate_shared(double a_curr, double a_prev, const TechParams& p);

/// True when the corresponding unclamped law would exceed 1.
bool private_miss_rate_clamped(double effective_size, const TechParams& p);
bool shared_miss_rate_clamped(double effective_size, const TechParams& p);

/// Smallest effective size for which each law stays <= 1. Below these sizes a
/// level never hits and the models are outside their validity range.
double min_private_increment(const TechParams& p);
double min_shared_increment(const TechParams& p);

// Congestion delays; +inf at or past saturation.
double queue_delay(double rate, const QueueParams& q);
double dram_queue_delay(double m_d, const TechParams& p);
double noc_queue_delay(double m_s, const TechParams& p);
/// d_t + d_b + d_c for the shared level.
double noc_delay(double m_s, const TechParams& p);

/// Average memory delay D_1, D_12 or D_123 depending on point.depth.
DelayBreakdown amat(const HierarchyPoint& point, const TechParams& p);

/// Hit latency of a single private level with constant access time chi.
double hit_latency_d_ca(double a1, const TechParams& p);
/// Hit latency of a single private level whose access time follows the power law.
double hit_latency_d_ymg(double a1, const TechParams& p);

/// Single-level average memory delay with constant access time chi:
/// (1 - m) * chi + m * d_D with m = mu / sqrt(a1 / alpha). Strictly decreasing in a1.
double amat_d_ca(double a1, const TechParams& p);
/// Single-level average memory delay with power-law access time:
/// (1 - m) * tau * (a1 / alpha)^beta + m * d_D. Has one interior minimum.
double amat_d_ymg(double a1, const TechParams& p);

/// Numerical minimizer of amat_d_ymg over a1 (Brent's method on log a1).
double minimize_d_ymg(const TechParams& p);

/// Objective and constraint functions of one point with their gradients with
/// respect to the cumulative areas (a1, a2, a3), by forward-mode differentiation.
struct PointDerivatives {
  double amat = 0.0;
  std::array<double, 3> d_amat{};
  double power = 0.0;
  std::array<double, 3> d_power{};
  double area = 0.0;
  std::array<double, 3> d_area{};
  double m_s = 0.0;
  std::array<double, 3> d_m_s{};
  double m_d = 0.0;
  std::array<double, 3> d_m_d{};
  bool degenerate = false;
  Saturation saturated = Saturation::None;
};

PointDerivatives evaluate_with_gradient(const HierarchyPoint& point, const TechParams& p);

/// Power (sum of rho * sqrt(A_j / alpha) over the used cumulative sizes).
double power_of(const HierarchyPoint& point, const TechParams& p);
/// Total area (sum of the used cumulative sizes).
double area_of(const HierarchyPoint& point);

}  // namespace cachehier
