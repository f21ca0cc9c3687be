#include "cachehier/powerlaw_fit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cachehier/params.hpp"

namespace cachehier {

FitResult fit_power_law(std::span<const AccessTimeSample> samples,
                        std::optional<double> fixed_alpha) {
  std::set<double> sizes;
  for (const auto& s : samples) {
    if (!(s.size > 0.0) || !(s.latency > 0.0) || !std::isfinite(s.size) ||
        !std::isfinite(s.latency))
      throw DomainError("sample sizes and latencies must be positive");
    sizes.insert(s.size);
  }
  if (sizes.size() < 3) throw InsufficientDataError("power-law fit needs >= 3 distinct sizes");
  if (fixed_alpha && !(*fixed_alpha > 0.0)) throw DomainError("alpha must be positive");

  FitResult r;
  r.alpha = fixed_alpha.value_or(*sizes.begin());

  const double n = static_cast<double>(samples.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& s : samples) {
    mean_x += std::log(s.size / r.alpha);
    mean_y += std::log(s.latency);
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& s : samples) {
    const double dx = std::log(s.size / r.alpha) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(s.latency) - mean_y);
  }
  r.beta = sxy / sxx;
  const double log_tau = mean_y - r.beta * mean_x;
  r.tau = std::exp(log_tau);

  r.per_sample_rel_error.reserve(samples.size());
  r.log_residuals.reserve(samples.size());
  for (const auto& s : samples) {
    const double log_pred = log_tau + r.beta * std::log(s.size / r.alpha);
    r.log_residuals.push_back(std::log(s.latency) - log_pred);
    const double err = std::abs(std::exp(log_pred) - s.latency) / s.latency;
    r.per_sample_rel_error.push_back(err);
    r.max_rel_error = std::max(r.max_rel_error, err);
    r.mean_rel_error += err / n;
  }
  return r;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view field, int line) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::runtime_error("line " + std::to_string(line) + ": invalid number '" +
                             std::string(field) + "'");
  return value;
}

}  // namespace

std::vector<AccessTimeSample> parse_samples_csv(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool header_seen = false;
  std::vector<AccessTimeSample> out;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view row = trim(raw);
    if (line == 1 && row.starts_with("\xEF\xBB\xBF")) row.remove_prefix(3);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "size_bytes,latency_ns")
        throw std::runtime_error("line " + std::to_string(line) +
                                 ": expected header 'size_bytes,latency_ns'");
      header_seen = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
      throw std::runtime_error("line " + std::to_string(line) + ": expected two columns");
    out.push_back({parse_double(row.substr(0, comma), line),
                   parse_double(row.substr(comma + 1), line)});
  }
  if (!header_seen) throw std::runtime_error("empty sample file");
  return out;
}

std::vector<AccessTimeSample> read_samples_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_samples_csv(buf.str());
}

}  // namespace cachehier
