// Command-line front end: eval, optimize, sweep, fit, verify.
//
// Exit codes: 0 ok, 1 infeasible, 2 input error, 3 verification failure.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "cachehier/config.hpp"
#include "cachehier/oracle.hpp"
#include "cachehier/powerlaw_fit.hpp"
#include "cachehier/report.hpp"

namespace ch = cachehier;

namespace {

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kInputError = 2;
constexpr int kVerifyFailed = 3;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ch::ConfigError("cannot write " + path);
  out << text;
}

struct Common {
  std::string config;
  std::string output;
  std::uint64_t seed = 1;
  int threads = 1;

  ch::SolverOptions solver() const {
    ch::SolverOptions o;
    o.seed = seed;
    o.threads = threads;
    return o;
  }
};

int run_eval(const Common& common, std::optional<int> depth, const std::vector<double>& areas) {
  const auto cfg = ch::load_config(common.config);
  std::optional<ch::HierarchyPoint> point = cfg.point;
  if (depth) {
    const ch::Depth d = ch::depth_from_levels(*depth);
    if (static_cast<int>(areas.size()) != ch::levels(d))
      throw ch::DomainError(fmt::format("depth {} needs {} areas", *depth, ch::levels(d)));
    point = ch::HierarchyPoint{d, areas[0], areas[std::min<std::size_t>(1, areas.size() - 1)],
                               areas.back()};
  }
  if (!point) throw ch::ConfigError("no point given: use --depth/--a1.. or a [point] section");
  point->validate();
  write_output(common.output, ch::format_eval(*point, cfg.model, cfg.constraints));
  return kOk;
}

int run_optimize(const Common& common) {
  const auto cfg = ch::load_config(common.config);
  const auto r = ch::optimize(cfg.model, cfg.constraints, common.solver());
  write_output(common.output, ch::format_optimization(r));
  return r.verdict == ch::Verdict::Optimal ? kOk : kInfeasible;
}

int run_sweep(const Common& common) {
  const auto cfg = ch::load_config(common.config);
  const auto rows = ch::run_sweep(cfg, common.solver());
  write_output(common.output.empty() ? cfg.output : common.output, ch::sweep_csv(cfg, rows));
  return kOk;
}

int run_fit(const Common& common, const std::string& samples, double tolerance,
            std::optional<double> alpha) {
  const auto data = ch::read_samples_csv(samples);
  const auto fit = ch::fit_power_law(data, alpha);
  ch::TechParams model;
  if (!common.config.empty()) model = ch::load_config(common.config).model;
  model.tau = fit.tau;
  model.alpha = fit.alpha;
  model.beta = fit.beta;

  std::string report = fmt::format("; fit: tau {:.6g}  alpha {:.6g}  beta {:.6g}\n", fit.tau,
                                   fit.alpha, fit.beta);
  report += fmt::format("; max relative error {:.4g}  mean {:.4g}  ({} samples)\n",
                        fit.max_rel_error, fit.mean_rel_error, data.size());
  const bool pass = fit.max_rel_error <= tolerance;
  report += fmt::format("; gate {:.4g}: {}\n", tolerance, pass ? "pass" : "FAIL");
  const std::string section = ch::write_model_section(model);
  if (common.output.empty() || common.output == "-") {
    std::cout << report << section;
  } else {
    std::cout << report;
    write_output(common.output, section);
  }
  if (!pass) return kVerifyFailed;
  return kOk;
}

int run_verify(const Common& common, int ppd, int max_ppd, double tolerance) {
  const auto cfg = ch::load_config(common.config);
  const auto r = ch::optimize(cfg.model, cfg.constraints, common.solver());
  const auto grid = ch::default_grid(cfg.model, cfg.constraints, ppd);

  ch::RefineOptions refine;
  refine.max_points_per_decade = max_ppd;
  std::string out = ch::format_optimization(r);
  std::optional<double> oracle_best;
  bool ok = true;
  for (const ch::Depth d : ch::kAllDepths) {
    const auto o = ch::refine_search(d, cfg.model, cfg.constraints, grid, common.threads, refine);
    const auto& mine = r.per_config[ch::levels(d) - 1];
    out += fmt::format("oracle depth {}: {}", ch::to_string(d), ch::to_string(o.verdict));
    if (o.verdict == ch::Verdict::Optimal) {
      out += fmt::format("  amat {:.10g}", o.objective);
      oracle_best = std::min(oracle_best.value_or(o.objective), o.objective);
      if (!mine.feasible() || mine.objective > o.objective * (1.0 + tolerance)) {
        out += "  MISMATCH";
        ok = false;
      }
    }
    out += "\n";
  }
  if (r.verdict == ch::Verdict::Optimal) {
    if (!r.best().kkt.passes()) ok = false;
    if (!oracle_best || std::abs(r.best().objective - *oracle_best) > tolerance * *oracle_best)
      ok = false;
  } else if (oracle_best) {
    ok = false;
  }
  out += ok ? "verify: pass\n" : "verify: FAIL\n";
  write_output(common.output, out);
  if (!ok) return kVerifyFailed;
  return r.verdict == ch::Verdict::Optimal ? kOk : kInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytical cache-hierarchy models and depth/area optimizer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CACHEHIER_VERSION));

  Common common;
  const auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config, "scenario file (INI)");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--output", common.output, "output file (default stdout)");
  };
  const auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "multi-start seed");
    sub->add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* eval = app.add_subcommand("eval", "evaluate one hierarchy point");
  add_common(eval, true);
  std::optional<int> depth;
  std::vector<double> areas(3, 0.0);
  std::vector<CLI::Option*> area_opts;
  eval->add_option("--depth", depth, "1, 2 or 3 (overrides [point])");
  area_opts.push_back(eval->add_option("--a1", areas[0], "cumulative size of L1"));
  area_opts.push_back(eval->add_option("--a2", areas[1], "cumulative size of L2"));
  area_opts.push_back(eval->add_option("--a3", areas[2], "cumulative size of L3"));

  auto* opt = app.add_subcommand("optimize", "optimal depth and areas under the constraints");
  add_common(opt, true);
  add_solver(opt);

  auto* sweep = app.add_subcommand("sweep", "solve every step of the [sweep] section, write CSV");
  add_common(sweep, true);
  add_solver(sweep);

  auto* fit = app.add_subcommand("fit", "fit the access-time power law to size_bytes,latency_ns data");
  add_common(fit, false);
  std::string samples;
  double fit_tolerance = 0.05;
  std::optional<double> alpha;
  fit->add_option("samples", samples, "sample CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--tolerance", fit_tolerance, "max relative error gate");
  fit->add_option("--alpha", alpha, "pin alpha (default: smallest size)");

  auto* verify = app.add_subcommand("verify", "optimize and cross-check against the grid oracle");
  add_common(verify, true);
  add_solver(verify);
  int ppd = 12;
  int max_ppd = 192;
  double verify_tolerance = 1e-4;
  verify->add_option("--grid-ppd", ppd, "oracle grid points per decade")->check(CLI::Range(8, 400));
  verify->add_option("--grid-max-ppd", max_ppd, "densify up to this when no grid point is feasible")
      ->check(CLI::Range(0, 1536));
  verify->add_option("--tolerance", verify_tolerance, "relative objective tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*eval) {
      std::vector<double> given;
      for (std::size_t k = 0; k < area_opts.size(); ++k)
        if (area_opts[k]->count() > 0) given.push_back(areas[k]);
      return run_eval(common, depth, given);
    }
    if (*opt) return run_optimize(common);
    if (*sweep) return run_sweep(common);
    if (*fit) return run_fit(common, samples, fit_tolerance, alpha);
    if (*verify) return run_verify(common, ppd, max_ppd, verify_tolerance);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
