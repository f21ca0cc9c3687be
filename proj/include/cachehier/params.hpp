#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cachehier {

/// Thrown when an input lies outside the domain of the analytical models
/// (non-positive area, degenerate increment, out-of-range parameter).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Functional form of a congestion delay d(x) driven by an access rate x.
///   MM1:    d(x) = k * x / (saturation - x), +inf at or beyond saturation
///   Linear: d(x) = k * x
enum class QueueForm { MM1, Linear };

std::string_view to_string(QueueForm form);
QueueForm queue_form_from_string(std::string_view text);

struct QueueParams {
  QueueForm form = QueueForm::MM1;
  double k = 0.0;           // ns
  double saturation = 1.0;  // access-rate pole, MM1 only

  bool operator==(const QueueParams&) const = default;
};

/// Calibration constants shared by every analytical model.
///
/// Areas are in one normalized unit (the unit of `alpha`); times are in ns.
struct TechParams {
  double tau = 1.0;    ///< access time of the baseline cache
  double alpha = 1.0;  ///< size of the baseline cache
  double beta = 0.5;   ///< power-law exponent of access time vs. size
  double chi = 1.0;    ///< constant access time of the fixed-latency reference model
  double mu = 0.1;     ///< miss rate of the baseline cache
  double mu_n = 0.0;   ///< size-independent miss component (remote-origin data)
  double e_n = 1.0;    ///< data sharing factor applied to the shared level
  int n_cores = 1;     ///< clients of the shared level
  double rho = 1.0;    ///< power of the baseline cache
  double d_d = 100.0;  ///< DRAM access penalty
  double d_t_coeff = 0.0;  ///< NoC transfer delay is d_t_coeff * sqrt(n_cores)
  QueueParams noc_q;   ///< blocking + congestion delay as a function of M_S
  QueueParams dram_q;  ///< DRAM interconnect queuing delay as a function of M_D

  /// Throws DomainError naming the first offending field.
  void validate() const;

  bool operator==(const TechParams&) const = default;
};

enum class Depth : int { OneLevel = 1, TwoLevel = 2, ThreeLevel = 3 };

inline constexpr std::array<Depth, 3> kAllDepths = {Depth::OneLevel, Depth::TwoLevel,
                                                    Depth::ThreeLevel};

constexpr int levels(Depth d) { return static_cast<int>(d); }
std::string_view to_string(Depth d);
Depth depth_from_levels(int levels);

/// A candidate design: hierarchy depth plus cumulative per-level sizes.
///
/// Level k's effective (exclusive) capacity is a_k - a_{k-1}. Levels deeper
/// than `depth` carry no meaning and are kept equal to the deepest used level.
struct HierarchyPoint {
  Depth depth = Depth::OneLevel;
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;

  static HierarchyPoint one_level(double a1);
  static HierarchyPoint two_level(double a1, double a2);
  static HierarchyPoint three_level(double a1, double a2, double a3);
  /// Builds cumulative areas from per-level increments; `increments.size()`
  /// must equal the number of levels of `depth`.
  static HierarchyPoint from_increments(Depth depth, std::span<const double> increments);

  double area(int level) const;  // 1-based cumulative size
  double increment(int level) const;
  std::array<double, 3> increments() const;  // unused levels report 0
  double deepest() const { return area(levels(depth)); }

  /// Throws DomainError unless 0 < a1 < a2 < a3 over the used levels.
  void validate() const;

  bool operator==(const HierarchyPoint&) const = default;
};

}  // namespace cachehier
