#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "cachehier/report.hpp"
#include "test_support.hpp"

using namespace cachehier;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

ScenarioConfig short_sweep() {
  auto cfg = testing::load("configs/noc_sweep.ini");
  cfg.sweep->steps = 9;
  return cfg;
}

}  // namespace

TEST_CASE("sweep csv layout") {
  const auto cfg = short_sweep();
  const auto csv = sweep_csv(cfg, run_sweep(cfg, {}));
  const auto lines = lines_of(csv);
  REQUIRE(lines.size() == 4 + 9);
  CHECK(lines[0].starts_with("# cachehier "));
  CHECK(lines[1] == "# config_hash " + config_hash(cfg));
  CHECK(lines[2] == "# sweep a_max from 1 to 1000 steps 9 log");
  CHECK(lines[3] == kSweepCsvHeader);
  for (std::size_t i = 4; i < lines.size(); ++i)
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 17);
  CHECK(lines[4].ends_with(",infeasible"));
  CHECK(lines.back().ends_with(",optimal"));
}

TEST_CASE("sweep csv is byte-identical across runs and thread counts") {
  const auto cfg = short_sweep();
  SolverOptions one, four;
  four.threads = 4;
  const auto a = sweep_csv(cfg, run_sweep(cfg, one));
  CHECK(sweep_csv(cfg, run_sweep(cfg, one)) == a);
  CHECK(sweep_csv(cfg, run_sweep(cfg, four)) == a);
}

TEST_CASE("eval report") {
  const auto cfg = testing::load("configs/reference.ini");
  const auto text = format_eval(*cfg.point, cfg.model, cfg.constraints);
  CHECK(text.find("amat             3.868234574") != std::string::npos);
  CHECK(text.find("(limit 100)") != std::string::npos);
  CHECK(text.find("(limit off)") != std::string::npos);
}

TEST_CASE("missing sweep section") {
  const auto cfg = testing::load("configs/reference.ini");
  CHECK_THROWS_AS(run_sweep(cfg, {}), ConfigError);
}
