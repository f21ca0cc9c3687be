#include "cachehier/params.hpp"

#include <cmath>
#include <string>

namespace cachehier {

namespace {

void check(bool ok, const char* field, const char* rule) {
  if (!ok) throw DomainError(std::string("model.") + field + " " + rule);
}

bool finite(double x) { return std::isfinite(x); }

void check_queue(const QueueParams& q, const char* k_field, const char* sat_field) {
  check(finite(q.k) && q.k >= 0.0, k_field, "must be >= 0");
  if (q.form == QueueForm::MM1)
    check(finite(q.saturation) && q.saturation > 0.0, sat_field, "must be > 0");
}

}  // namespace

std::string_view to_string(QueueForm form) {
  return form == QueueForm::MM1 ? "mm1" : "linear";
}

QueueForm queue_form_from_string(std::string_view text) {
  if (text == "mm1") return QueueForm::MM1;
  if (text == "linear") return QueueForm::Linear;
  throw DomainError("unknown queue form '" + std::string(text) + "' (expected mm1 or linear)");
}

void TechParams::validate() const {
  check(finite(tau) && tau > 0.0, "tau", "must be > 0");
  check(finite(alpha) && alpha > 0.0, "alpha", "must be > 0");
  check(beta > 0.0 && beta < 1.0, "beta", "must lie in (0, 1)");
  check(finite(chi) && chi > 0.0, "chi", "must be > 0");
  check(mu > 0.0 && mu <= 1.0, "mu", "must lie in (0, 1]");
  check(mu_n >= 0.0 && mu_n < 1.0, "mu_n", "must lie in [0, 1)");
  check(finite(e_n) && e_n >= 1.0, "e_n", "must be >= 1");
  check(n_cores >= 1, "n_cores", "must be >= 1");
  check(finite(rho) && rho > 0.0, "rho", "must be > 0");
  check(finite(d_d) && d_d > 0.0, "d_d", "must be > 0");
  check(finite(d_t_coeff) && d_t_coeff >= 0.0, "d_t_coeff", "must be >= 0");
  check_queue(noc_q, "noc_queue_k", "noc_queue_saturation");
  check_queue(dram_q, "dram_queue_k", "dram_queue_saturation");
}

std::string_view to_string(Depth d) {
  switch (d) {
    case Depth::OneLevel: return "1";
    case Depth::TwoLevel: return "2";
    case Depth::ThreeLevel: return "3";
  }
  return "?";
}

Depth depth_from_levels(int n) {
  if (n < 1 || n > 3) throw DomainError("depth must be 1, 2 or 3");
  return static_cast<Depth>(n);
}

HierarchyPoint HierarchyPoint::one_level(double a1) {
  return {Depth::OneLevel, a1, a1, a1};
}

HierarchyPoint HierarchyPoint::two_level(double a1, double a2) {
  return {Depth::TwoLevel, a1, a2, a2};
}

HierarchyPoint HierarchyPoint::three_level(double a1, double a2, double a3) {
  return {Depth::ThreeLevel, a1, a2, a3};
}

HierarchyPoint HierarchyPoint::from_increments(Depth depth, std::span<const double> increments) {
  if (static_cast<int>(increments.size()) != levels(depth))
    throw DomainError("increment count does not match hierarchy depth");
  std::array<double, 3> a{};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (k < levels(depth)) total += increments[k];
    a[k] = total;
  }
  return {depth, a[0], a[1], a[2]};
}

double HierarchyPoint::area(int level) const {
  switch (level) {
    case 1: return a1;
    case 2: return a2;
    case 3: return a3;
    default: throw DomainError("level must be 1, 2 or 3");
  }
}

double HierarchyPoint::increment(int level) const {
  return level == 1 ? a1 : area(level) - area(level - 1);
}

std::array<double, 3> HierarchyPoint::increments() const {
  std::array<double, 3> out{};
  for (int k = 1; k <= levels(depth); ++k) out[k - 1] = increment(k);
  return out;
}

void HierarchyPoint::validate() const {
  if (!(a1 > 0.0) || !std::isfinite(a1)) throw DomainError("a1 must be positive and finite");
  if (levels(depth) >= 2 && !(a2 > a1 && std::isfinite(a2)))
    throw DomainError("a2 must exceed a1");
  if (levels(depth) >= 3 && !(a3 > a2 && std::isfinite(a3)))
    throw DomainError("a3 must exceed a2");
}

}  // namespace cachehier
