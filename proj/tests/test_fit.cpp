#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cachehier/powerlaw_fit.hpp"
#include "test_support.hpp"

using namespace cachehier;
using doctest::Approx;

TEST_CASE("exact power-law data is recovered") {
  std::vector<AccessTimeSample> s;
  for (double size = 1024.0; size <= 4.0 * 1024 * 1024; size *= 2.0)
    s.push_back({size, 0.7 * std::pow(size / 1024.0, 0.42)});
  const auto f = fit_power_law(s);
  CHECK(f.alpha == 1024.0);
  CHECK(f.tau == Approx(0.7).epsilon(1e-9));
  CHECK(f.beta == Approx(0.42).epsilon(1e-9));
  CHECK(f.max_rel_error < 1e-9);

  const auto pinned = fit_power_law(s, 4096.0);
  CHECK(pinned.alpha == 4096.0);
  CHECK(pinned.tau == Approx(0.7 * std::pow(4.0, 0.42)).epsilon(1e-9));
  CHECK(pinned.beta == Approx(0.42).epsilon(1e-9));
}

TEST_CASE("noisy data stays inside the error gate") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> noise(-0.03, 0.03);
  std::vector<AccessTimeSample> s;
  for (double size = 4096.0; size <= 16.0 * 1024 * 1024; size *= 2.0)
    s.push_back({size, 1.1 * std::pow(size / 4096.0, 0.5) * (1.0 + noise(rng))});
  const auto f = fit_power_law(s);
  CHECK(f.max_rel_error <= 0.05);
  CHECK(std::abs(f.beta - 0.5) <= 0.02);
  CHECK(f.per_sample_rel_error.size() == s.size());
}

TEST_CASE("too few distinct sizes") {
  std::vector<AccessTimeSample> s = {{4096, 0.6}, {8192, 0.8}};
  CHECK_THROWS_AS(fit_power_law(s), InsufficientDataError);
  s.push_back({8192, 0.81});
  CHECK_THROWS_AS(fit_power_law(s), InsufficientDataError);
}

TEST_CASE("sample csv parsing") {
  const auto s = parse_samples_csv("size_bytes,latency_ns\r\n4096,0.6\r\n8192,0.8\r\n");
  REQUIRE(s.size() == 2);
  CHECK(s[1].size == 8192.0);
  CHECK(s[1].latency == 0.8);
  CHECK_THROWS_WITH_AS(parse_samples_csv("size_bytes,latency_ns\n4096,0.6\n8192,x\n"),
                       doctest::Contains("line 3"), std::runtime_error);
  CHECK_THROWS(fit_power_law(parse_samples_csv("size_bytes,latency_ns\n-1,0.6\n2,1\n4,2\n")));
  CHECK_THROWS_AS(parse_samples_csv(""), std::runtime_error);
}

TEST_CASE("bundled sample set") {
  const auto s = read_samples_csv(testing::source_path("data/cacti_like.csv"));
  const auto f = fit_power_law(s);
  CHECK(f.max_rel_error <= 0.05);
  CHECK(std::abs(f.beta - 0.45) <= 0.02);
}
