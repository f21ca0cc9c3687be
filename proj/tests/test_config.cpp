#include <doctest.h>

#include "cachehier/config.hpp"
#include "test_support.hpp"

using namespace cachehier;
using doctest::Approx;

namespace {

const char* kMinimal = R"(
[model]
tau = 1
alpha = 1
beta = 0.5
chi = 2
mu = 0.2
rho = 1
d_d = 100
)";

}  // namespace

TEST_CASE("minimal scenario uses defaults") {
  const auto c = parse_config(kMinimal);
  CHECK(c.model.beta == 0.5);
  CHECK(c.model.n_cores == 1);
  CHECK(c.model.noc_q.form == QueueForm::Linear);
  CHECK(c.model.noc_q.k == 0.0);
  CHECK_FALSE(c.constraints.a_max);
  CHECK_FALSE(c.sweep);
  CHECK_FALSE(c.point);
}

TEST_CASE("shipped scenarios round-trip") {
  for (const char* name : {"reference", "area_sweep", "power_sweep", "offchip_sweep", "noc_sweep"}) {
    CAPTURE(name);
    const auto c = testing::load(std::string("configs/") + name + ".ini");
    const auto text = write_config(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(write_config(back) == text);
    CHECK(config_hash(back) == config_hash(c));
  }
}

TEST_CASE("hash tracks content but not the output path") {
  auto c = testing::load("configs/reference.ini");
  const auto h = config_hash(c);
  CHECK(h.size() == 16);
  c.output = "elsewhere.csv";
  CHECK(config_hash(c) == h);
  c.model.mu *= 1.0 + 1e-15;
  CHECK(config_hash(c) != h);
}

TEST_CASE("errors name the offending field") {
  std::string no_tau = kMinimal;
  no_tau.erase(no_tau.find("tau = 1\n"), 8);
  CHECK_THROWS_WITH_AS(parse_config(no_tau), doctest::Contains("model.tau"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(std::string(kMinimal) + "[constraints]\nbudget = 3\n"),
                       doctest::Contains("constraints.budget"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(std::string(kMinimal) + "[extra]\n"),
                       doctest::Contains("[extra]"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[constraints]\na_max = big\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[constraints]\na_max = -2\n"), std::exception);
  CHECK_THROWS_AS(parse_config("x = 1\n" + std::string(kMinimal)), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[point]\ndepth = 2\na1 = 5\na2 = 3\n"),
                  std::exception);
  std::string bad_q = std::string(kMinimal) + "noc_queue_form = mm1\n";
  CHECK_THROWS_WITH(parse_config(bad_q), doctest::Contains("saturation"));
}

TEST_CASE("sweep values") {
  SweepSpec s{SweepVariable::AMax, 1.0, 1000.0, 4, true};
  const auto v = s.values();
  REQUIRE(v.size() == 4);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == Approx(10.0));
  CHECK(v[3] == 1000.0);
  s.log_scale = false;
  s.to = 4.0;
  CHECK(s.values()[2] == Approx(3.0));
  CHECK(sweep_variable_from_string("m_s_max") == SweepVariable::MsMax);
  CHECK_THROWS(sweep_variable_from_string("latency"));
  const auto c = with_budget({}, SweepVariable::PMax, 4.0);
  CHECK(c.p_max == 4.0);
  CHECK_FALSE(c.a_max);
}
