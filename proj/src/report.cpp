#include "cachehier/report.hpp"

#include <fmt/format.h>

#include <atomic>
#include <thread>

namespace cachehier {

namespace {

std::string g(double v) { return fmt::format("{:.10g}", v); }

std::string join_active(const std::vector<ConstraintId>& ids) {
  std::string out;
  for (const ConstraintId id : ids) {
    if (!out.empty()) out += '|';
    out += to_string(id);
  }
  return out;
}

std::string limit_text(const std::optional<double>& v) { return v ? g(*v) : "off"; }

}  // namespace

std::string format_eval(const HierarchyPoint& point, const TechParams& p, const ConstraintSet& c) {
  const DelayBreakdown b = amat(point, p);
  const ConstraintValues v = constraint_values(point, p);
  std::string out = fmt::format("depth            {}\n", to_string(point.depth));
  out += "areas           ";
  for (int k = 1; k <= levels(point.depth); ++k) out += " " + g(point.area(k));
  out += fmt::format("\namat             {}\n", g(b.amat));
  for (int k = 0; k < levels(point.depth); ++k)
    out += fmt::format("  L{}  m={} t={} hit_term={}\n", k + 1, g(b.miss_rates[k]),
                       g(b.access_times[k]), g(b.level_hit_terms[k]));
  out += fmt::format("  dram_term        {}\n", g(b.dram_term));
  out += fmt::format("m_s              {}\nm_d              {}\n", g(b.m_s), g(b.m_d));
  out += fmt::format("d_noc            {}\nd_q              {}\n", g(b.d_noc), g(b.d_q));
  out += fmt::format("power            {}  (limit {})\n", g(v.power), limit_text(c.p_max));
  out += fmt::format("area             {}  (limit {})\n", g(v.area), limit_text(c.a_max));
  out += fmt::format("m_d constraint   {}  (limit {})\n", g(v.m_d), limit_text(c.m_d_max));
  out += fmt::format("m_s constraint   {}  (limit {})\n", g(v.m_s), limit_text(c.m_s_max));
  if (b.degenerate) out += "warning: a miss rate is clamped to 1\n";
  if (b.saturated != Saturation::None)
    out += fmt::format("warning: {} queue saturated\n", to_string(b.saturated));
  return out;
}

std::string format_optimization(const OptimizationResult& r) {
  std::string out;
  if (r.verdict == Verdict::Infeasible) {
    out += "verdict  all-infeasible\n";
  } else {
    out += fmt::format("winner   depth {}  amat {}\n", to_string(r.winner), g(r.best().objective));
  }
  for (const auto& c : r.per_config) {
    out += fmt::format("depth {}: {}", to_string(c.depth), to_string(c.verdict));
    if (c.feasible()) {
      out += fmt::format("  amat {}  areas", g(c.objective));
      for (int k = 1; k <= levels(c.depth); ++k) out += " " + g(c.point.area(k));
      out += fmt::format("  active [{}]", join_active(c.active));
      out += fmt::format("  kkt stat {:.3g} compl {:.3g} primal {:.3g}", c.kkt.stationarity,
                         c.kkt.complementarity, c.kkt.primal_violation);
      out += "  lambda";
      for (const ConstraintId id : c.active)
        out += fmt::format(" {}={}", to_string(id), g(c.multipliers.constraint[static_cast<int>(id)]));
    }
    if (!c.diagnostic.empty()) out += "  (" + c.diagnostic + ")";
    out += "\n";
  }
  for (const auto& w : r.warnings) out += "warning: " + w + "\n";
  return out;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& config, const SolverOptions& options) {
  if (!config.sweep) throw ConfigError("missing [sweep] section");
  const auto values = config.sweep->values();
  std::vector<SweepRow> rows(values.size());
  SolverOptions step_options = options;
  step_options.threads = 1;

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      rows[i].budget = values[i];
      rows[i].result = optimize(
          config.model, with_budget(config.constraints, config.sweep->variable, values[i]),
          step_options);
    }
  };
  const int workers = std::max(1, std::min<int>(options.threads, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

std::string sweep_csv(const ScenarioConfig& config, const std::vector<SweepRow>& rows) {
  std::string out;
  out += fmt::format("# cachehier {}\n", CACHEHIER_VERSION);
  out += fmt::format("# config_hash {}\n", config_hash(config));
  if (config.sweep)
    out += fmt::format("# sweep {} from {} to {} steps {} {}\n", to_string(config.sweep->variable),
                       g(config.sweep->from), g(config.sweep->to), config.sweep->steps,
                       config.sweep->log_scale ? "log" : "linear");
  out += kSweepCsvHeader;
  out += '\n';
  for (const auto& row : rows) {
    const auto& r = row.result;
    out += g(row.budget);
    if (r.verdict == Verdict::Optimal) {
      const auto& w = r.best();
      const int n = levels(w.depth);
      const auto inc = w.point.increments();
      const double total = w.point.deepest();
      out += fmt::format(",{},{}", n, g(w.objective));
      for (int k = 1; k <= 3; ++k) out += "," + (k <= n ? g(w.point.area(k)) : std::string("0"));
      for (int k = 0; k < 3; ++k) out += "," + (k < n ? g(inc[k] / total) : std::string("0"));
    } else {
      out += ",,,,,,,,";
    }
    for (const auto& c : r.per_config)
      out += fmt::format(",{},{}", c.feasible() ? g(c.objective) : std::string(), c.feasible() ? 1 : 0);
    out += "," + (r.verdict == Verdict::Optimal ? join_active(r.best().active) : std::string());
    out += fmt::format(",{},{}\n", r.boundary.any() ? 1 : 0,
                       r.verdict == Verdict::Optimal ? "optimal" : "infeasible");
  }
  return out;
}

}  // namespace cachehier
