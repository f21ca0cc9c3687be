#include "cachehier/models.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <string>

namespace cachehier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Value plus gradient with respect to the three cumulative areas.
struct Dual {
  double v = 0.0;
  std::array<double, 3> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: constants promote implicitly
  static Dual variable(double value, int index) {
    Dual x(value);
    x.d[index] = 1.0;
    return x;
  }
};

Dual operator+(const Dual& a, const Dual& b) {
  Dual r(a.v + b.v);
  for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
Dual operator-(const Dual& a, const Dual& b) {
  Dual r(a.v - b.v);
  for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
Dual operator*(const Dual& a, const Dual& b) {
  Dual r(a.v * b.v);
  for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
Dual operator/(const Dual& a, const Dual& b) {
  Dual r(a.v / b.v);
  for (int i = 0; i < 3; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
  return r;
}
Dual& operator+=(Dual& a, const Dual& b) { return a = a + b; }

Dual chain(const Dual& x, double value, double slope) {
  Dual r(value);
  for (int i = 0; i < 3; ++i) r.d[i] = slope * x.d[i];
  return r;
}

double value_of(double x) { return x; }
double value_of(const Dual& x) { return x.v; }

double power_law(double x, double e) { return std::pow(x, e); }
Dual power_law(const Dual& x, double e) {
  const double value = std::pow(x.v, e);
  return chain(x, value, e * value / x.v);
}

double inv_sqrt(double x) { return 1.0 / std::sqrt(x); }
Dual inv_sqrt(const Dual& x) {
  const double value = 1.0 / std::sqrt(x.v);
  return chain(x, value, -0.5 * value / x.v);
}

double sqrt_of(double x) { return std::sqrt(x); }
Dual sqrt_of(const Dual& x) {
  const double value = std::sqrt(x.v);
  return chain(x, value, 0.5 / value);
}

template <class T>
T clamp_unit(const T& x, bool& clamped) {
  if (value_of(x) > 1.0) {
    clamped = true;
    return T(1.0);
  }
  return x;
}

template <class T>
T queue(const T& x, const QueueParams& q) {
  if (q.form == QueueForm::Linear) return T(q.k) * x;
  if (value_of(x) >= q.saturation) return T(kInf);
  if constexpr (std::is_same_v<T, double>) {
    return q.k * x / (q.saturation - x);
  } else {
    const double gap = q.saturation - x.v;
    return chain(x, q.k * x.v / gap, q.k * q.saturation / (gap * gap));
  }
}

template <class T>
T private_miss(const T& effective, const TechParams& p, bool& clamped) {
  return clamp_unit(T(p.mu_n) + T((1.0 - p.mu_n) * p.mu) * inv_sqrt(effective / T(p.alpha)),
                    clamped);
}

template <class T>
T shared_miss(const T& effective, const TechParams& p, bool& clamped) {
  return clamp_unit(T(p.mu * p.e_n) * inv_sqrt(effective / T(p.n_cores * p.alpha)), clamped);
}

template <class T>
T private_time(const T& area, const TechParams& p) {
  return T(p.tau) * power_law(area / T(p.alpha), p.beta);
}

template <class T>
struct Evaluation {
  int levels = 1;
  T amat;
  std::array<T, 3> hit{};
  T dram_term;
  std::array<T, 3> miss{};
  std::array<T, 3> time{};
  T m_s;
  T m_d;
  T d_noc;
  T d_q;
  T power;
  T area;
  bool degenerate = false;
  Saturation saturated = Saturation::None;
};

// Single evaluation path shared by the plain and the differentiated entry
// points. Miss rates come first, then M_S, then the NoC-dependent shared
// access time.
template <class T>
Evaluation<T> evaluate(const std::array<T, 3>& a, Depth depth, const TechParams& p) {
  Evaluation<T> e;
  e.levels = levels(depth);
  const int shared = depth == Depth::OneLevel ? 0 : e.levels;  // 1-based, 0 = none

  T upstream(1.0);
  for (int k = 1; k <= e.levels; ++k) {
    const T effective = k == 1 ? a[0] : a[k - 1] - a[k - 2];
    e.miss[k - 1] = k == shared ? shared_miss(effective, p, e.degenerate)
                                : private_miss(effective, p, e.degenerate);
    if (k == shared) e.m_s = upstream;
    upstream = upstream * e.miss[k - 1];
  }
  e.m_d = upstream;

  e.d_noc = T(0.0);
  if (shared != 0) {
    e.d_noc = T(p.d_t_coeff * std::sqrt(static_cast<double>(p.n_cores))) + queue(e.m_s, p.noc_q);
  } else {
    e.m_s = T(0.0);
  }
  e.d_q = queue(e.m_d, p.dram_q);

  T reach(1.0);
  e.amat = T(0.0);
  for (int k = 1; k <= e.levels; ++k) {
    if (k == shared) {
      const T effective = a[k - 1] - a[k - 2];
      e.time[k - 1] = e.d_noc + T(p.tau) * power_law(effective / T(p.n_cores * p.alpha), p.beta);
    } else {
      e.time[k - 1] = private_time(a[k - 1], p);
    }
    e.hit[k - 1] = reach * (T(1.0) - e.miss[k - 1]) * e.time[k - 1];
    e.amat += e.hit[k - 1];
    reach = reach * e.miss[k - 1];
  }
  e.dram_term = e.m_d * (T(p.d_d) + e.d_q);
  e.amat += e.dram_term;

  if (!std::isfinite(value_of(e.d_noc)))
    e.saturated = Saturation::Noc;
  else if (!std::isfinite(value_of(e.d_q)))
    e.saturated = Saturation::Dram;
  if (e.saturated != Saturation::None) e.amat = T(kInf);

  e.power = T(0.0);
  e.area = T(0.0);
  for (int k = 1; k <= e.levels; ++k) {
    e.power += T(p.rho) * sqrt_of(a[k - 1] / T(p.alpha));
    e.area += a[k - 1];
  }
  return e;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

std::string_view to_string(Saturation s) {
  switch (s) {
    case Saturation::None: return "none";
    case Saturation::Noc: return "noc";
    case Saturation::Dram: return "dram";
  }
  return "none";
}

double access_time_private(double area, const TechParams& p) {
  require_positive(area, "area");
  return private_time(area, p);
}

double access_time_shared(double cumulative_area, double prev_cumulative_area, double m_s,
                          const TechParams& p) {
  if (prev_cumulative_area < 0.0) throw DomainError("previous cumulative area must be >= 0");
  const double effective = cumulative_area - prev_cumulative_area;
  if (!(effective > 0.0)) throw DomainError("shared level increment must be positive");
  return noc_delay(m_s, p) + p.tau * std::pow(effective / (p.n_cores * p.alpha), p.beta);
}

double miss_rate_private_l1(double a1, const TechParams& p) {
  require_positive(a1, "a1");
  bool clamped = false;
  return private_miss(a1, p, clamped);
}

double miss_rate_private_inner(double a_curr, double a_prev, const TechParams& p) {
  if (!(a_curr > a_prev)) throw DomainError("private level increment must be positive");
  bool clamped = false;
  return private_miss(a_curr - a_prev, p, clamped);
}

double miss_rate_shared(double a_curr, double a_prev, const TechParams& p) {
  if (!(a_curr > a_prev)) throw DomainError("shared level increment must be positive");
  bool clamped = false;
  return shared_miss(a_curr - a_prev, p, clamped);
}

bool private_miss_rate_clamped(double effective_size, const TechParams& p) {
  bool clamped = false;
  private_miss(effective_size, p, clamped);
  return clamped;
}

bool shared_miss_rate_clamped(double effective_size, const TechParams& p) {
  bool clamped = false;
  shared_miss(effective_size, p, clamped);
  return clamped;
}

double min_private_increment(const TechParams& p) { return p.alpha * p.mu * p.mu; }

double min_shared_increment(const TechParams& p) {
  const double m = p.mu * p.e_n;
  return p.n_cores * p.alpha * m * m;
}

double queue_delay(double rate, const QueueParams& q) {
  if (rate < 0.0) throw DomainError("access rate must be >= 0");
  return queue(rate, q);
}

double dram_queue_delay(double m_d, const TechParams& p) { return queue_delay(m_d, p.dram_q); }

double noc_queue_delay(double m_s, const TechParams& p) { return queue_delay(m_s, p.noc_q); }

double noc_delay(double m_s, const TechParams& p) {
  return p.d_t_coeff * std::sqrt(static_cast<double>(p.n_cores)) + noc_queue_delay(m_s, p);
}

DelayBreakdown amat(const HierarchyPoint& point, const TechParams& p) {
  point.validate();
  const auto e = evaluate<double>({point.a1, point.a2, point.a3}, point.depth, p);
  DelayBreakdown b;
  b.depth = point.depth;
  b.amat = e.amat;
  b.level_hit_terms.assign(e.hit.begin(), e.hit.begin() + e.levels);
  b.miss_rates.assign(e.miss.begin(), e.miss.begin() + e.levels);
  b.access_times.assign(e.time.begin(), e.time.begin() + e.levels);
  b.dram_term = e.dram_term;
  b.m_s = e.m_s;
  b.m_d = e.m_d;
  b.d_noc = e.d_noc;
  b.d_q = e.d_q;
  b.degenerate = e.degenerate;
  b.saturated = e.saturated;
  return b;
}

double hit_latency_d_ca(double a1, const TechParams& p) {
  require_positive(a1, "a1");
  return (1.0 - p.mu / std::sqrt(a1 / p.alpha)) * p.chi;
}

double hit_latency_d_ymg(double a1, const TechParams& p) {
  require_positive(a1, "a1");
  return (1.0 - p.mu / std::sqrt(a1 / p.alpha)) * p.tau * std::pow(a1 / p.alpha, p.beta);
}

double amat_d_ca(double a1, const TechParams& p) {
  const double m = p.mu / std::sqrt(a1 / p.alpha);
  return hit_latency_d_ca(a1, p) + m * p.d_d;
}

double amat_d_ymg(double a1, const TechParams& p) {
  const double m = p.mu / std::sqrt(a1 / p.alpha);
  return hit_latency_d_ymg(a1, p) + m * p.d_d;
}

double minimize_d_ymg(const TechParams& p) {
  // The stationary point sits near mu * d_D / tau in units of alpha; bracket
  // generously around it in log space.
  const double center = std::log(std::max(p.mu * p.d_d / p.tau, 1e-6));
  const auto objective = [&](double log_x) { return amat_d_ymg(p.alpha * std::exp(log_x), p); };
  const auto [log_x, value] = boost::math::tools::brent_find_minima(
      objective, center - 30.0, center + 30.0, std::numeric_limits<double>::digits / 2);
  (void)value;
  return p.alpha * std::exp(log_x);
}

PointDerivatives evaluate_with_gradient(const HierarchyPoint& point, const TechParams& p) {
  point.validate();
  const std::array<Dual, 3> a = {Dual::variable(point.a1, 0), Dual::variable(point.a2, 1),
                                 Dual::variable(point.a3, 2)};
  const auto e = evaluate<Dual>(a, point.depth, p);
  PointDerivatives r;
  r.amat = e.amat.v;
  r.d_amat = e.amat.d;
  r.power = e.power.v;
  r.d_power = e.power.d;
  r.area = e.area.v;
  r.d_area = e.area.d;
  r.m_s = e.m_s.v;
  r.d_m_s = e.m_s.d;
  r.m_d = e.m_d.v;
  r.d_m_d = e.m_d.d;
  r.degenerate = e.degenerate;
  r.saturated = e.saturated;
  return r;
}

double power_of(const HierarchyPoint& point, const TechParams& p) {
  double total = 0.0;
  for (int k = 1; k <= levels(point.depth); ++k) total += p.rho * std::sqrt(point.area(k) / p.alpha);
  return total;
}

double area_of(const HierarchyPoint& point) {
  double total = 0.0;
  for (int k = 1; k <= levels(point.depth); ++k) total += point.area(k);
  return total;
}

}  // namespace cachehier
