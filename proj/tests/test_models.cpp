#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cachehier/models.hpp"
#include "test_support.hpp"

using namespace cachehier;
using doctest::Approx;

namespace {

TechParams unit_params() {
  TechParams p;
  p.tau = 1.0;
  p.alpha = 1.0;
  p.beta = 0.5;
  p.mu = 0.1;
  p.mu_n = 0.0;
  p.d_d = 100.0;
  p.noc_q = {QueueForm::Linear, 0.0, 1.0};
  p.dram_q = {QueueForm::Linear, 0.0, 1.0};
  return p;
}

}  // namespace

TEST_CASE("private access time") {
  TechParams p = unit_params();
  CHECK(access_time_private(p.alpha, p) == Approx(p.tau));
  CHECK(access_time_private(4.0, p) == Approx(2.0));
  p.tau = 0.8;
  p.alpha = 32.0;
  p.beta = 0.4;
  CHECK(access_time_private(512.0, p) == Approx(2.4251465064).epsilon(1e-10));
  CHECK_THROWS_AS(access_time_private(0.0, p), DomainError);
  CHECK_THROWS_AS(access_time_private(-1.0, p), DomainError);
}

TEST_CASE("shared access time") {
  TechParams p = unit_params();
  p.n_cores = 4;
  CHECK(access_time_shared(5.0, 1.0, 0.3, p) == Approx(p.tau));  // increment n*alpha, no NoC
  p.d_t_coeff = 1.0;
  CHECK(access_time_shared(8.0, 4.0, 0.0, p) == Approx(3.0));

  p.n_cores = 16;
  p.d_t_coeff = 0.5;
  p.beta = 0.4;
  p.noc_q = {QueueForm::MM1, 2.0, 0.8};
  // 0.5*4 + 2*0.2/0.6 + 4^0.4
  CHECK(access_time_shared(64.0, 0.0, 0.2, p) == Approx(4.4077677933).epsilon(1e-10));
  CHECK_THROWS_AS(access_time_shared(3.0, 3.0, 0.0, p), DomainError);
}

TEST_CASE("miss rates") {
  TechParams p = unit_params();
  p.mu_n = 0.02;
  p.mu = 0.3;
  CHECK(miss_rate_private_l1(1.0, p) == Approx(0.02 + 0.98 * 0.3));
  CHECK(miss_rate_private_l1(25.0, p) == Approx(0.0788));
  p.mu_n = 0.0;
  p.mu = 0.1;
  CHECK(miss_rate_private_l1(4.0, p) == Approx(0.05));

  p.mu = 0.2;
  CHECK(miss_rate_private_inner(20.0, 4.0, p) == Approx(0.05));
  p.mu_n = 0.01;
  p.mu = 0.25;
  CHECK(miss_rate_private_inner(12.0, 3.0, p) == Approx(0.0925));
  CHECK_THROWS_AS(miss_rate_private_inner(3.0, 3.0, p), DomainError);

  p.mu = 0.1;
  p.e_n = 2.0;
  p.n_cores = 4;
  CHECK(miss_rate_shared(20.0, 4.0, p) == Approx(0.1));
  p.mu = 0.15;
  p.e_n = 1.5;
  p.n_cores = 8;
  CHECK(miss_rate_shared(80.0, 8.0, p) == Approx(0.075));
  p.e_n = 1.0;
  CHECK(miss_rate_shared(18.0, 10.0, p) == Approx(p.mu));
}

TEST_CASE("miss rates clamp at the minimum effective size") {
  TechParams p = unit_params();
  p.mu = 0.6;
  p.mu_n = 0.1;
  CHECK(miss_rate_private_l1(0.01, p) == 1.0);
  CHECK(private_miss_rate_clamped(0.01, p));
  CHECK_FALSE(private_miss_rate_clamped(min_private_increment(p) * 1.001, p));
  CHECK(private_miss_rate_clamped(min_private_increment(p) * 0.999, p));
  p.n_cores = 8;
  p.e_n = 1.3;
  CHECK_FALSE(shared_miss_rate_clamped(min_shared_increment(p) * 1.001, p));
  CHECK(shared_miss_rate_clamped(min_shared_increment(p) * 0.999, p));
}

TEST_CASE("queue delays") {
  TechParams p = unit_params();
  p.dram_q = {QueueForm::MM1, 10.0, 0.5};
  CHECK(dram_queue_delay(0.0, p) == 0.0);
  CHECK(dram_queue_delay(0.25, p) == Approx(10.0));
  CHECK(std::isinf(dram_queue_delay(0.5, p)));
  CHECK(std::isinf(dram_queue_delay(0.7, p)));
  p.noc_q = {QueueForm::MM1, 5.0, 0.8};
  CHECK(noc_queue_delay(0.0, p) == 0.0);
  CHECK(noc_queue_delay(0.4, p) == Approx(5.0));
  CHECK(std::isinf(noc_queue_delay(0.8, p)));
  p.noc_q = {QueueForm::Linear, 3.0, 1.0};
  CHECK(noc_queue_delay(0.5, p) == Approx(1.5));
  CHECK_THROWS_AS(queue_delay(-0.1, p.noc_q), DomainError);

  double prev = -1.0;
  for (double x = 0.0; x < 0.79; x += 0.01) {
    const double d = queue_delay(x, {QueueForm::MM1, 5.0, 0.8});
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("single-level delay") {
  const TechParams p = unit_params();
  const auto b = amat(HierarchyPoint::one_level(4.0), p);
  CHECK(b.miss_rates[0] == Approx(0.05));
  CHECK(b.access_times[0] == Approx(2.0));
  CHECK(b.amat == Approx(6.9));
  CHECK(b.m_s == 0.0);
  CHECK(b.m_d == Approx(0.05));
  CHECK_FALSE(b.degenerate);
}

TEST_CASE("three-level delay on the reference model") {
  const TechParams p = testing::reference_params();
  const auto b = amat(testing::reference_point(), p);
  CHECK(b.amat == Approx(testing::kReferenceAmat).epsilon(1e-12));
  CHECK(b.m_s == Approx(testing::kReferenceMs).epsilon(1e-12));
  CHECK(b.m_d == Approx(testing::kReferenceMd).epsilon(1e-12));
  CHECK(b.m_s == Approx(b.miss_rates[0] * b.miss_rates[1]));
  CHECK(b.m_d == Approx(b.m_s * b.miss_rates[2]));
}

TEST_CASE("saturation yields an infinite delay with the cause") {
  TechParams p = unit_params();
  p.dram_q = {QueueForm::MM1, 1.0, 0.01};
  auto b = amat(HierarchyPoint::one_level(4.0), p);
  CHECK(std::isinf(b.amat));
  CHECK(b.saturated == Saturation::Dram);

  p = unit_params();
  p.n_cores = 4;
  p.noc_q = {QueueForm::MM1, 1.0, 0.01};
  b = amat(HierarchyPoint::two_level(4.0, 40.0), p);
  CHECK(std::isinf(b.amat));
  CHECK(b.saturated == Saturation::Noc);
}

TEST_CASE("two-level limits") {
  TechParams p = unit_params();
  p.n_cores = 4;
  p.mu = 0.3;
  p.mu_n = 0.05;
  p.e_n = 1.2;
  p.dram_q = {QueueForm::MM1, 5.0, 0.9};

  const double d1 = amat(HierarchyPoint::one_level(3.0), p).amat;
  const auto tiny = amat(HierarchyPoint::two_level(3.0, 3.0 + 1e-9), p);
  CHECK(tiny.miss_rates[1] == 1.0);
  CHECK(tiny.degenerate);
  CHECK(tiny.amat == Approx(d1).epsilon(1e-12));

  double prev = std::numeric_limits<double>::infinity();
  for (double inc : {1e2, 1e4, 1e6, 1e8}) {
    const auto b = amat(HierarchyPoint::two_level(3.0, 3.0 + inc), p);
    CHECK(b.dram_term < prev);
    prev = b.dram_term;
  }
  CHECK(prev < 1e-3 * amat(HierarchyPoint::one_level(3.0), p).dram_term);
}

TEST_CASE("structure of access rates") {
  TechParams p = testing::reference_params();
  const auto b2 = amat(HierarchyPoint::two_level(1.0, 5.0), p);
  CHECK(b2.m_s == b2.miss_rates[0]);
  CHECK(b2.m_d == Approx(b2.miss_rates[0] * b2.miss_rates[1]));
  const auto b1 = amat(HierarchyPoint::one_level(2.0), p);
  CHECK(b1.m_d == b1.miss_rates[0]);
  CHECK(b1.d_noc == 0.0);
}

TEST_CASE("delay components sum to the total") {
  const TechParams p = testing::reference_params();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(std::log(0.2), std::log(500.0));
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Depth d = kAllDepths[i % 3];
    std::array<double, 3> inc{};
    for (auto& x : inc) x = std::exp(u(rng));
    const auto pt = HierarchyPoint::from_increments(d, std::span<const double>(inc.data(), levels(d)));
    const auto b = amat(pt, p);
    if (!std::isfinite(b.amat)) continue;
    double sum = b.dram_term;
    for (double h : b.level_hit_terms) sum += h;
    worst = std::max(worst, std::abs(sum - b.amat) / std::abs(b.amat));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("constant and power-law single-level models") {
  TechParams p = unit_params();
  p.chi = 2.0;
  CHECK(hit_latency_d_ca(4.0, p) == Approx(1.9));
  p.mu = 0.3;
  p.chi = 1.5;
  CHECK(hit_latency_d_ca(9.0, p) == Approx(1.35));
  CHECK(hit_latency_d_ymg(1.0, p) == Approx(1.0 - p.mu));
  CHECK(amat_d_ca(1e16, p) == Approx(p.chi).epsilon(1e-5));

  // Stationary point of tau x^b - tau mu x^(b-1/2) + mu d_D x^(-1/2) for
  // b = 1/2 is x* = mu d_D / tau.
  p.beta = 0.5;
  p.mu = 0.2;
  p.d_d = 50.0;
  CHECK(minimize_d_ymg(p) == Approx(10.0).epsilon(1e-6));
  CHECK(amat_d_ymg(10.0, p) < amat_d_ymg(9.0, p));
  CHECK(amat_d_ymg(10.0, p) < amat_d_ymg(11.0, p));
  CHECK(amat_d_ymg(4.0, p) > amat_d_ymg(16.0, p));
  CHECK(amat_d_ymg(1.0, p) > amat_d_ymg(4.0, p));
}

TEST_CASE("gradients match central differences") {
  const TechParams p = testing::reference_params();
  std::mt19937_64 rng(11);
  for (const Depth d : kAllDepths) {
    const auto lb = testing::min_sizes(d, p);
    int checked = 0;
    while (checked < 100) {
      std::array<double, 3> inc{};
      for (int k = 0; k < levels(d); ++k)
        inc[k] = lb[k] * std::exp(std::uniform_real_distribution<double>(0.05, 6.0)(rng));
      const auto pt = HierarchyPoint::from_increments(d, std::span<const double>(inc.data(), levels(d)));
      const auto g = evaluate_with_gradient(pt, p);
      if (!std::isfinite(g.amat)) continue;
      ++checked;
      for (int k = 0; k < levels(d); ++k) {
        const double fd = testing::central_difference(pt, k, p);
        CHECK(std::abs(fd - g.d_amat[k]) <= 1e-4 * std::max(std::abs(fd), 1e-8));
      }
    }
  }
}
