#include "cachehier/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>

namespace cachehier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Minimization over y_i = log(delta_i / alpha). Constraint rows are the
// enabled limits normalized as g/L - 1 followed by one lower bound per level,
// ylb_i - y_i. The objective is divided by `fscale`.
struct Problem {
  Depth depth;
  int dim;
  const TechParams& p;
  std::vector<ConstraintId> ids;
  std::vector<double> limits;
  std::array<double, 3> lb{};
  Vec ylb;
  double fscale = 1.0;

  int rows() const { return static_cast<int>(ids.size()) + dim; }
};

struct Eval {
  bool ok = false;
  double f = kInf;
  Vec grad;
  Vec c;
  Mat jac;  // rows x dim
  bool degenerate = false;
};

double pick(const PointDerivatives& d, ConstraintId id, std::array<double, 3>& grad) {
  switch (id) {
    case ConstraintId::Power: grad = d.d_power; return d.power;
    case ConstraintId::OffChip: grad = d.d_m_d; return d.m_d;
    case ConstraintId::Area: grad = d.d_area; return d.area;
    case ConstraintId::Noc: grad = d.d_m_s; return d.m_s;
  }
  return 0.0;
}

std::array<double, 3> increments_of(const Problem& pr, const Vec& y) {
  std::array<double, 3> delta{};
  for (int i = 0; i < pr.dim; ++i) delta[i] = pr.p.alpha * std::exp(y[i]);
  return delta;
}

HierarchyPoint point_of(const Problem& pr, const Vec& y) {
  const auto delta = increments_of(pr, y);
  return HierarchyPoint::from_increments(pr.depth, std::span<const double>(delta.data(), pr.dim));
}

Eval evaluate(const Problem& pr, const Vec& y) {
  Eval e;
  if (!y.allFinite()) return e;
  const auto delta = increments_of(pr, y);
  for (int i = 0; i < pr.dim; ++i)
    if (!(delta[i] > 0.0) || !std::isfinite(delta[i])) return e;
  const HierarchyPoint pt = point_of(pr, y);
  PointDerivatives d;
  try {
    d = evaluate_with_gradient(pt, pr.p);
  } catch (const DomainError&) {
    return e;
  }
  if (!std::isfinite(d.amat)) return e;

  // d/dy_i = delta_i * sum_{k >= i} d/dA_k
  const auto to_y = [&](const std::array<double, 3>& g) {
    Vec out(pr.dim);
    double tail = 0.0;
    for (int i = pr.dim - 1; i >= 0; --i) {
      tail += g[i];
      out[i] = delta[i] * tail;
    }
    return out;
  };

  e.ok = true;
  e.f = d.amat / pr.fscale;
  e.grad = to_y(d.d_amat) / pr.fscale;
  e.c.resize(pr.rows());
  e.jac = Mat::Zero(pr.rows(), pr.dim);
  for (std::size_t k = 0; k < pr.ids.size(); ++k) {
    std::array<double, 3> g{};
    const double value = pick(d, pr.ids[k], g);
    e.c[k] = value / pr.limits[k] - 1.0;
    e.jac.row(k) = to_y(g).transpose() / pr.limits[k];
  }
  for (int i = 0; i < pr.dim; ++i) {
    const int row = static_cast<int>(pr.ids.size()) + i;
    e.c[row] = pr.ylb[i] - y[i];
    e.jac(row, i) = -1.0;
  }
  e.degenerate = d.degenerate;
  return e;
}

double violation(const Eval& e) {
  return e.ok ? std::max(0.0, e.c.maxCoeff()) : kInf;
}

// Augmented Lagrangian value and gradient.
struct Merit {
  double value = kInf;
  Vec grad;
};

Merit merit(const Eval& e, const Vec& lambda, double r) {
  Merit m;
  if (!e.ok) return m;
  m.value = e.f;
  m.grad = e.grad;
  for (int k = 0; k < e.c.size(); ++k) {
    const double shifted = std::max(0.0, lambda[k] + r * e.c[k]);
    m.value += (shifted * shifted - lambda[k] * lambda[k]) / (2.0 * r);
    if (shifted > 0.0) m.grad += shifted * e.jac.row(k).transpose();
  }
  return m;
}

// BFGS on the augmented Lagrangian with Armijo backtracking.
Vec minimize_merit(const Problem& pr, Vec y, const Vec& lambda, double r) {
  Eval e = evaluate(pr, y);
  Merit m = merit(e, lambda, r);
  if (!std::isfinite(m.value)) return y;
  Mat hinv = Mat::Identity(pr.dim, pr.dim);
  for (int iter = 0; iter < 300; ++iter) {
    if (m.grad.lpNorm<Eigen::Infinity>() < 1e-12) break;
    Vec dir = -hinv * m.grad;
    double slope = m.grad.dot(dir);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      dir = -m.grad;
      slope = m.grad.dot(dir);
    }
    const double longest = dir.lpNorm<Eigen::Infinity>();
    if (longest > 1.0) {
      dir /= longest;
      slope /= longest;
    }
    double t = 1.0;
    Vec y_next;
    Eval e_next;
    Merit m_next;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      y_next = y + t * dir;
      e_next = evaluate(pr, y_next);
      m_next = merit(e_next, lambda, r);
      if (std::isfinite(m_next.value) && m_next.value <= m.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const Vec s = y_next - y;
    const Vec q = m_next.grad - m.grad;
    const double sq = s.dot(q);
    if (sq > 1e-16 * s.norm() * q.norm()) {
      const double rho = 1.0 / sq;
      const Mat id = Mat::Identity(pr.dim, pr.dim);
      hinv = (id - rho * s * q.transpose()) * hinv * (id - rho * q * s.transpose()) +
             rho * s * s.transpose();
    }
    const bool stalled = std::abs(m.value - m_next.value) <= 1e-15 * std::max(1.0, std::abs(m.value)) &&
                         s.lpNorm<Eigen::Infinity>() < 1e-12;
    y = y_next;
    e = e_next;
    m = m_next;
    if (stalled) break;
  }
  return y;
}

struct LocalResult {
  bool ok = false;
  Vec y;
  Vec mult;  // multipliers of the normalized rows, objective scaled by fscale
  double f = kInf;
  double viol = kInf;
};

LocalResult augmented_lagrangian(const Problem& pr, Vec y) {
  Vec lambda = Vec::Zero(pr.rows());
  double r = 10.0;
  double prev_viol = kInf;
  for (int outer = 0; outer < 60; ++outer) {
    y = minimize_merit(pr, y, lambda, r);
    const Eval e = evaluate(pr, y);
    if (!e.ok) break;
    const Vec next = (lambda + r * e.c).cwiseMax(0.0);
    const double step = (next - lambda).lpNorm<Eigen::Infinity>();
    lambda = next;
    const double viol = violation(e);
    if (viol <= 1e-12 && step <= 1e-10) break;
    if (viol > 0.25 * prev_viol) r = std::min(r * 10.0, 1e12);
    prev_viol = viol;
  }
  LocalResult out;
  const Eval e = evaluate(pr, y);
  if (!e.ok) return out;
  out.ok = true;
  out.y = y;
  out.mult = lambda;
  out.f = e.f;
  out.viol = violation(e);
  return out;
}

// Gradient of f + mult . c over a fixed set of rows.
Vec lagrangian_gradient(const Eval& e, const std::vector<int>& set, const Vec& mult) {
  Vec g = e.grad;
  for (std::size_t k = 0; k < set.size(); ++k) g += mult[k] * e.jac.row(set[k]).transpose();
  return g;
}

// Newton iteration on the KKT system of the equality-constrained problem
// restricted to `set`. Hessian by central differences of analytic gradients.
bool newton_kkt(const Problem& pr, const std::vector<int>& set, Vec& y, Vec& mult) {
  const int n = pr.dim;
  const int m = static_cast<int>(set.size());
  const auto residual = [&](const Vec& yy, const Vec& mm, Eval& e) {
    e = evaluate(pr, yy);
    Vec f(n + m);
    if (!e.ok) return Vec(Vec::Constant(n + m, kInf));
    f.head(n) = lagrangian_gradient(e, set, mm);
    for (int k = 0; k < m; ++k) f[n + k] = e.c[set[k]];
    return f;
  };

  Eval e;
  {
    // Least-squares multipliers as the starting guess.
    e = evaluate(pr, y);
    if (!e.ok) return false;
    if (m > 0) {
      Mat a(n, m);
      for (int k = 0; k < m; ++k) a.col(k) = e.jac.row(set[k]).transpose();
      mult = a.colPivHouseholderQr().solve(-e.grad);
    } else {
      mult.resize(0);
    }
  }

  Vec f = residual(y, mult, e);
  for (int iter = 0; iter < 60; ++iter) {
    const double norm = f.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(norm)) return false;
    if (norm < 1e-14) return true;

    Mat k = Mat::Zero(n + m, n + m);
    for (int i = 0; i < n; ++i) {
      const double h = 1e-5;
      Vec up = y, dn = y;
      up[i] += h;
      dn[i] -= h;
      const Eval eu = evaluate(pr, up);
      const Eval ed = evaluate(pr, dn);
      if (!eu.ok || !ed.ok) return false;
      k.block(0, i, n, 1) =
          (lagrangian_gradient(eu, set, mult) - lagrangian_gradient(ed, set, mult)) / (2.0 * h);
    }
    const Mat hs = 0.5 * (k.topLeftCorner(n, n) + k.topLeftCorner(n, n).transpose());
    k.topLeftCorner(n, n) = hs;
    for (int j = 0; j < m; ++j) {
      k.block(0, n + j, n, 1) = e.jac.row(set[j]).transpose();
      k.block(n + j, 0, 1, n) = e.jac.row(set[j]);
    }
    const Eigen::FullPivLU<Mat> lu(k);
    if (lu.rank() < n + m) return false;
    const Vec step = lu.solve(-f);
    if (!step.allFinite()) return false;

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vec ys = y + t * step.head(n);
      Vec ms = mult + t * step.tail(m);
      Eval es;
      Vec fs = residual(ys, ms, es);
      if (fs.allFinite() && fs.norm() < (1.0 - 1e-4 * t) * f.norm()) {
        y = ys;
        mult = ms;
        e = es;
        f = fs;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return f.lpNorm<Eigen::Infinity>() < 1e-11;
  }
  return f.lpNorm<Eigen::Infinity>() < 1e-11;
}

// Identifies the active set from an approximate solution and solves the KKT
// system on it exactly, adding or dropping one row at a time.
bool polish(const Problem& pr, LocalResult& sol) {
  const Eval e0 = evaluate(pr, sol.y);
  if (!e0.ok) return false;
  std::vector<int> set;
  for (int k = 0; k < pr.rows(); ++k)
    if (e0.c[k] > -1e-6 || sol.mult[k] > 1e-10) set.push_back(k);
  if (static_cast<int>(set.size()) > pr.dim) {
    std::sort(set.begin(), set.end(),
              [&](int a, int b) { return sol.mult[a] != sol.mult[b] ? sol.mult[a] > sol.mult[b] : a < b; });
    set.resize(pr.dim);
  }

  for (int round = 0; round < 12; ++round) {
    std::sort(set.begin(), set.end());
    Vec y = sol.y;
    Vec mult;
    if (!newton_kkt(pr, set, y, mult)) return false;
    const Eval e = evaluate(pr, y);
    if (!e.ok) return false;

    int worst_neg = -1;
    for (int k = 0; k < static_cast<int>(set.size()); ++k)
      if (mult[k] < -1e-12 && (worst_neg < 0 || mult[k] < mult[worst_neg])) worst_neg = k;
    if (worst_neg >= 0) {
      set.erase(set.begin() + worst_neg);
      continue;
    }
    int worst_viol = -1;
    for (int k = 0; k < pr.rows(); ++k) {
      if (std::find(set.begin(), set.end(), k) != set.end()) continue;
      if (e.c[k] > 1e-12 && (worst_viol < 0 || e.c[k] > e.c[worst_viol])) worst_viol = k;
    }
    if (worst_viol >= 0) {
      if (static_cast<int>(set.size()) >= pr.dim) return false;
      set.push_back(worst_viol);
      continue;
    }

    LocalResult out;
    out.ok = true;
    out.y = y;
    out.mult = Vec::Zero(pr.rows());
    for (std::size_t k = 0; k < set.size(); ++k) out.mult[set[k]] = std::max(0.0, mult[k]);
    out.f = e.f;
    out.viol = violation(e);
    // The polished point must not be worse than the approximate one.
    if (out.viol > 1e-12) return false;
    if (out.f > sol.f + 1e-7 * std::abs(sol.f) && sol.viol <= 1e-9) return false;
    sol = out;
    return true;
  }
  return false;
}

std::vector<Vec> choose_starts(const Problem& pr, const ConstraintSet& c, const SolverOptions& opt,
                               Depth depth) {
  double upper = kInf;
  if (c.a_max) upper = std::min(upper, *c.a_max);
  if (c.p_max) upper = std::min(upper, pr.p.alpha * std::pow(*c.p_max / pr.p.rho, 2));
  if (!std::isfinite(upper)) {
    const double biggest = *std::max_element(pr.lb.begin(), pr.lb.begin() + pr.dim);
    upper = std::max(1e5 * pr.p.alpha, 1e3 * biggest);
  }

  const int per = std::max(2, opt.seeds_per_dim);
  std::vector<std::vector<double>> axes(pr.dim);
  for (int i = 0; i < pr.dim; ++i) {
    const double lo = std::log(pr.lb[i] * 1.01 / pr.p.alpha);
    const double hi = std::max(lo, std::log(upper / pr.p.alpha));
    for (int s = 0; s < per; ++s) axes[i].push_back(lo + (hi - lo) * s / (per - 1));
  }

  struct Seed {
    Vec y;
    double f;
    double viol;
    int index;
  };
  std::vector<Seed> seeds;
  int total = 1;
  for (int i = 0; i < pr.dim; ++i) total *= per;
  for (int idx = 0; idx < total; ++idx) {
    Vec y(pr.dim);
    int rest = idx;
    for (int i = 0; i < pr.dim; ++i) {
      y[i] = axes[i][rest % per];
      rest /= per;
    }
    const Eval e = evaluate(pr, y);
    if (!e.ok) continue;
    seeds.push_back({y, e.f, violation(e), idx});
  }

  std::vector<Vec> starts;
  if (seeds.empty()) return starts;
  std::vector<Seed> feasible, infeasible;
  for (const auto& s : seeds) (s.viol <= 0.0 ? feasible : infeasible).push_back(s);
  std::sort(feasible.begin(), feasible.end(), [](const Seed& a, const Seed& b) {
    return a.f != b.f ? a.f < b.f : a.index < b.index;
  });
  std::sort(infeasible.begin(), infeasible.end(), [](const Seed& a, const Seed& b) {
    return a.viol != b.viol ? a.viol < b.viol : a.index < b.index;
  });
  const int want = std::max(1, opt.grid_starts);
  for (int i = 0; i < std::min<int>(want, feasible.size()); ++i) starts.push_back(feasible[i].y);
  const int fill = std::max(2, want - static_cast<int>(starts.size()));
  for (int i = 0; i < std::min<int>(fill, infeasible.size()); ++i) starts.push_back(infeasible[i].y);

  std::mt19937_64 rng(opt.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(levels(depth)));
  std::normal_distribution<double> jitter(0.0, 0.5);
  const Vec base = starts.front();
  for (int k = 0; k < opt.random_starts; ++k) {
    Vec y = base;
    for (int i = 0; i < pr.dim; ++i) y[i] = std::max(pr.ylb[i] + 0.01, y[i] + jitter(rng));
    starts.push_back(y);
  }
  return starts;
}

}  // namespace

void ConstraintSet::validate() const {
  const auto check = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0 && std::isfinite(*v)))
      throw DomainError(std::string("constraints.") + name + " must be > 0");
  };
  check(p_max, "p_max");
  check(m_d_max, "m_d_max");
  check(a_max, "a_max");
  check(m_s_max, "m_s_max");
}

std::string_view to_string(ConstraintId id) {
  switch (id) {
    case ConstraintId::Power: return "power";
    case ConstraintId::OffChip: return "offchip";
    case ConstraintId::Area: return "area";
    case ConstraintId::Noc: return "noc";
  }
  return "?";
}

std::optional<double> limit_of(const ConstraintSet& c, ConstraintId id) {
  switch (id) {
    case ConstraintId::Power: return c.p_max;
    case ConstraintId::OffChip: return c.m_d_max;
    case ConstraintId::Area: return c.a_max;
    case ConstraintId::Noc: return c.m_s_max;
  }
  return std::nullopt;
}

double ConstraintValues::get(ConstraintId id) const {
  switch (id) {
    case ConstraintId::Power: return power;
    case ConstraintId::OffChip: return m_d;
    case ConstraintId::Area: return area;
    case ConstraintId::Noc: return m_s;
  }
  return 0.0;
}

ConstraintValues constraint_values(const HierarchyPoint& point, const TechParams& p) {
  const DelayBreakdown b = amat(point, p);
  return {power_of(point, p), b.m_d, area_of(point), b.m_s};
}

std::array<double, 3> min_increments(Depth depth, const TechParams& p) {
  std::array<double, 3> lb{};
  const int n = levels(depth);
  for (int i = 0; i < n; ++i)
    lb[i] = (depth != Depth::OneLevel && i == n - 1) ? min_shared_increment(p)
                                                     : min_private_increment(p);
  return lb;
}

std::string_view to_string(Verdict v) {
  return v == Verdict::Optimal ? "optimal" : "infeasible";
}

ConfigResult optimize_config(Depth depth, const TechParams& p, const ConstraintSet& c,
                             const SolverOptions& options) {
  p.validate();
  c.validate();

  Problem pr{depth, levels(depth), p, {}, {}, {}, Vec(levels(depth)), 1.0};
  for (const ConstraintId id : kAllConstraints) {
    const auto limit = limit_of(c, id);
    if (!limit) continue;
    if (id == ConstraintId::Noc && depth == Depth::OneLevel) continue;  // g4 = 0 < limit
    pr.ids.push_back(id);
    pr.limits.push_back(*limit);
  }
  pr.lb = min_increments(depth, p);
  for (int i = 0; i < pr.dim; ++i) pr.ylb[i] = std::log(pr.lb[i] / p.alpha);

  ConfigResult result;
  result.depth = depth;
  result.point = HierarchyPoint::from_increments(
      depth, std::span<const double>(pr.lb.data(), pr.dim));

  const auto starts = choose_starts(pr, c, options, depth);
  if (starts.empty()) {
    result.diagnostic = "every start point saturates the NoC or DRAM queue";
    return result;
  }
  {
    Vec y0 = starts.front();
    pr.fscale = std::max(1e-6, std::abs(evaluate(pr, y0).f));
  }

  LocalResult best;
  for (const Vec& y0 : starts) {
    LocalResult local = augmented_lagrangian(pr, y0);
    if (!local.ok) continue;
    polish(pr, local);
    const bool feasible = local.viol <= 1e-10;
    const bool best_feasible = best.ok && best.viol <= 1e-10;
    if (!best.ok || (feasible && !best_feasible) ||
        (feasible == best_feasible && (feasible ? local.f < best.f : local.viol < best.viol)))
      best = local;
  }
  if (!best.ok) {
    result.diagnostic = "local search failed from every start";
    return result;
  }

  // Snap rows that sit on their minimum effective size onto it exactly
  // (slightly above, so the miss law stays strictly below 1).
  std::array<double, 3> delta = increments_of(pr, best.y);
  const int first_bound = static_cast<int>(pr.ids.size());
  for (int i = 0; i < pr.dim; ++i) {
    if (best.mult[first_bound + i] > 0.0 || delta[i] < pr.lb[i] * (1.0 + 1e-12)) {
      delta[i] = pr.lb[i] * (1.0 + 1e-14);
      result.at_min_size[i] = true;
    }
  }
  result.point = HierarchyPoint::from_increments(depth, std::span<const double>(delta.data(), pr.dim));
  const DelayBreakdown b = amat(result.point, p);
  result.objective = b.amat;
  result.values = constraint_values(result.point, p);
  result.degenerate = b.degenerate;

  for (std::size_t k = 0; k < pr.ids.size(); ++k) {
    const int id = static_cast<int>(pr.ids[k]);
    result.multipliers.constraint[id] = best.mult[k] * pr.fscale / pr.limits[k];
    if (best.mult[k] > 0.0 ||
        std::abs(result.values.get(pr.ids[k]) / pr.limits[k] - 1.0) <= 1e-8)
      result.active.push_back(pr.ids[k]);
  }
  for (int i = 0; i < pr.dim; ++i)
    result.multipliers.lower_bound[i] = best.mult[first_bound + i] * pr.fscale / delta[i];

  result.kkt = kkt_residual(result.point, result.multipliers, p, c);
  const bool feasible = best.viol <= 1e-10 && result.kkt.primal_violation <= options.kkt.primal;
  if (feasible && b.saturated == Saturation::None) {
    result.verdict = Verdict::Optimal;
    if (!result.kkt.passes(options.kkt)) result.diagnostic = "KKT residual above tolerance";
  } else {
    result.verdict = Verdict::Infeasible;
    result.diagnostic = b.saturated != Saturation::None
                            ? std::string("queue saturated: ") + std::string(to_string(b.saturated))
                            : "no feasible point found";
  }
  return result;
}

OptimizationResult optimize(const TechParams& p, const ConstraintSet& c,
                            const SolverOptions& options) {
  OptimizationResult out;
  if (options.threads > 1) {
    std::array<std::future<ConfigResult>, 3> jobs;
    for (int i = 0; i < 3; ++i)
      jobs[i] = std::async(std::launch::async, [&, i] {
        return optimize_config(kAllDepths[i], p, c, options);
      });
    for (int i = 0; i < 3; ++i) out.per_config[i] = jobs[i].get();
  } else {
    for (int i = 0; i < 3; ++i) out.per_config[i] = optimize_config(kAllDepths[i], p, c, options);
  }
  select_winner(out, options);
  return out;
}

void select_winner(OptimizationResult& out, const SolverOptions& options) {
  out.warnings.clear();
  out.boundary = {};
  const double tol = options.tie_tolerance;
  const auto same = [&](const ConfigResult& a, const ConfigResult& b) {
    return a.feasible() && b.feasible() &&
           std::abs(a.objective - b.objective) <=
               tol * std::max(std::abs(a.objective), std::abs(b.objective));
  };

  int winner = -1;
  for (int i = 0; i < 3; ++i) {
    const auto& r = out.per_config[i];
    if (!r.feasible()) continue;
    if (winner < 0) {
      winner = i;
      continue;
    }
    const double best = out.per_config[winner].objective;
    if (r.objective < best - tol * std::abs(best)) winner = i;
  }
  if (winner < 0) {
    out.verdict = Verdict::Infeasible;
    out.warnings.push_back("all hierarchy depths infeasible");
    return;
  }
  out.verdict = Verdict::Optimal;
  out.winner = kAllDepths[winner];

  const auto& w = out.per_config[winner];
  const auto near_winner = [&](const ConfigResult& r) {
    return std::abs(r.objective - w.objective) <= tol * std::abs(w.objective);
  };
  const auto& [r1, r2, r3] = out.per_config;
  out.boundary.d1_eq_d12 = same(r1, r2) && near_winner(r1);
  out.boundary.d1_eq_d123 = same(r1, r3) && near_winner(r1);
  out.boundary.d12_eq_d123 = same(r2, r3) && near_winner(r2);

  if (w.degenerate) out.warnings.push_back("winner lies in a clamped miss-rate region");
  if (!w.kkt.passes(options.kkt)) out.warnings.push_back("winner KKT residual above tolerance");
  if (out.boundary.any()) out.warnings.push_back("winner sits on an equal-delay boundary");
}

}  // namespace cachehier
