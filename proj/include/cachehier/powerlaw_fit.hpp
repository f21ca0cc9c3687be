#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cachehier {

struct AccessTimeSample {
  double size = 0.0;     // bytes
  double latency = 0.0;  // ns
};

struct FitResult {
  double tau = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::vector<double> per_sample_rel_error;
  std::vector<double> log_residuals;
};

class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Least-squares fit of latency = tau * (size / alpha)^beta in log-log space.
///
/// tau and alpha are not separately identifiable, so alpha is pinned to
/// `fixed_alpha` or, by default, to the smallest sample size. Relative errors
/// are reported in linear space. Needs at least three distinct sizes.
FitResult fit_power_law(std::span<const AccessTimeSample> samples,
                        std::optional<double> fixed_alpha = std::nullopt);

/// Reads `size_bytes,latency_ns` CSV (header required, LF or CRLF).
/// Throws std::runtime_error with the offending line number.
std::vector<AccessTimeSample> read_samples_csv(const std::string& path);
std::vector<AccessTimeSample> parse_samples_csv(const std::string& text);

}  // namespace cachehier
