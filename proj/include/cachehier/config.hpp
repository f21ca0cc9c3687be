#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cachehier/optimizer.hpp"
#include "cachehier/params.hpp"

namespace cachehier {

/// Parse or validation failure in a scenario file. The message names the
/// offending line or `section.key`.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepVariable { AMax, PMax, MdMax, MsMax };

std::string_view to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(std::string_view text);

struct SweepSpec {
  SweepVariable variable = SweepVariable::AMax;
  double from = 1.0;
  double to = 10.0;
  int steps = 2;
  bool log_scale = true;

  std::vector<double> values() const;
  bool operator==(const SweepSpec&) const = default;
};

/// Applies one sweep value to the matching limit.
ConstraintSet with_budget(ConstraintSet c, SweepVariable v, double value);

struct ScenarioConfig {
  TechParams model;
  ConstraintSet constraints;
  std::optional<SweepSpec> sweep;
  std::optional<HierarchyPoint> point;
  std::string output;  // sweep CSV path; empty means stdout

  bool operator==(const ScenarioConfig&) const = default;
};

/// Reads an INI scenario with sections [model], [constraints], [sweep],
/// [point] and [output]. Unknown sections and keys are rejected.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Canonical text form; parse_config(write_config(c)) == c.
std::string write_config(const ScenarioConfig& c);
std::string write_model_section(const TechParams& p);

/// FNV-1a 64-bit hash of the canonical form without the output path, as 16
/// hex digits.
std::string config_hash(const ScenarioConfig& c);

}  // namespace cachehier
