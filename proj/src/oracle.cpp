#include "wassos/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wassos {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += (a[t] - b[t]) * (a[t] - b[t]);
  return s;
}

// Tightens [lo, hi] on axis t for an inequality a * x_t + c >= 0.
void tighten(const Poly& h, std::vector<double>& lo, std::vector<double>& hi) {
  if (h.total_degree() != 1) return;
  int axis = -1;
  double a = 0.0;
  double c = 0.0;
  for (const auto& [e, v] : h.terms()) {
    if (e.degree() == 0) {
      c = v;
      continue;
    }
    for (std::size_t t = 0; t < e.nvars(); ++t) {
      if (e[t] == 0) continue;
      if (axis >= 0 && axis != static_cast<int>(t)) return;
      axis = static_cast<int>(t);
      a = v;
    }
  }
  if (axis < 0) return;
  const double root = -c / a;
  if (a > 0.0) {
    lo[axis] = std::max(lo[axis], root);
  } else {
    hi[axis] = std::min(hi[axis], root);
  }
}

}  // namespace

Grid make_grid(const SupportSet& support, std::size_t per_axis) {
  const std::size_t m = support.dim;
  if (per_axis < 2) throw std::invalid_argument("make_grid: per_axis must be at least 2");
  if (m == 0 || m > kMaxGridDim) {
    throw std::invalid_argument("make_grid: dimension must lie in 1.." + std::to_string(kMaxGridDim));
  }
  Grid g;
  g.per_axis = per_axis;
  const double rho = support.norm_bound;
  g.lo.assign(m, -rho);
  g.hi.assign(m, rho);
  for (const auto& h : support.inequalities) tighten(h, g.lo, g.hi);
  for (std::size_t t = 0; t < m; ++t) {
    if (g.lo[t] > g.hi[t]) return g;
    g.spacing.push_back((g.hi[t] - g.lo[t]) / static_cast<double>(per_axis - 1));
  }

  std::vector<std::size_t> idx(m, 0);
  std::vector<double> p(m);
  while (true) {
    for (std::size_t t = 0; t < m; ++t) {
      p[t] = idx[t] + 1 == per_axis ? g.hi[t] : g.lo[t] + g.spacing[t] * static_cast<double>(idx[t]);
    }
    double n2 = 0.0;
    for (double v : p) n2 += v * v;
    bool keep = n2 <= rho * rho * (1.0 + 1e-12) + kGridMembershipTol;
    for (const auto& h : support.inequalities) {
      if (!keep) break;
      keep = h.eval(p) >= -kGridMembershipTol;
    }
    if (keep) g.points.push_back(p);
    std::size_t t = 0;
    while (t < m && ++idx[t] == per_axis) idx[t++] = 0;
    if (t == m) break;
  }
  return g;
}

double empirical_value(const PiecewiseLoss& loss, const Samples& samples) {
  if (samples.size() == 0) return 0.0;
  double s = 0.0;
  for (const auto& p : samples.points) s += loss.eval(p);
  return s / static_cast<double>(samples.size());
}

double grid_primal_bound(const DroModel& model, const Grid& grid, const SolverOptions& options) {
  const std::size_t N = model.samples.size();
  const std::size_t S = grid.points.size();
  if (S == 0) throw std::invalid_argument("grid_primal_bound: empty grid");
  if (N == 0) throw std::invalid_argument("grid_primal_bound: no samples");

  std::vector<double> loss(S);
  for (std::size_t s = 0; s < S; ++s) loss[s] = model.loss.eval(grid.points[s]);
  // Distances are measured in units of the support radius to keep the
  // budget row comparable to the simplex rows.
  const double unit = std::max(model.support.norm_bound, 1.0);
  const double inv_n = 1.0 / static_cast<double>(N);

  ConicStandardForm f;
  f.sense = Sense::Minimize;
  f.num_nonneg = N * S + 1;
  f.rows.resize(N + 1);
  f.rhs.assign(N + 1, 1.0);
  f.rhs[N] = (model.radius / unit) * (model.radius / unit);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t col = i * S + s;
      f.rows[i].linear.emplace_back(col, 1.0);
      const double d = sq_dist(grid.points[s], model.samples.points[i]) / (unit * unit);
      if (d != 0.0) f.rows[N].linear.emplace_back(col, inv_n * d);
      if (loss[s] != 0.0) f.objective.linear.emplace_back(col, inv_n * loss[s]);
    }
  }
  f.rows[N].linear.emplace_back(N * S, 1.0);

  const SolveResult res = solve(f, options);
  if (res.status != SolveStatus::Optimal) {
    throw std::runtime_error("grid_primal_bound: LP ended with status " + to_string(res.status));
  }
  return res.objective;
}

double semiinfinite_residual(double lambda, const std::vector<double>& alpha, const PointFunction& g,
                             const Samples& samples, const Grid& grid) {
  if (lambda < 0.0) throw std::invalid_argument("semiinfinite_residual: lambda must be nonnegative");
  if (alpha.size() != samples.size()) throw std::invalid_argument("semiinfinite_residual: need one alpha per sample");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : grid.points) {
    const double gv = g(p);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      best = std::min(best, gv + lambda * sq_dist(p, samples.points[i]) - alpha[i]);
    }
  }
  return best;
}

double semiinfinite_residual(double lambda, const std::vector<double>& alpha, const DroModel& model,
                             const Grid& grid) {
  return semiinfinite_residual(
      lambda, alpha, [&](std::span<const double> p) { return model.loss.eval(p); }, model.samples, grid);
}

double cvar_empirical(std::vector<double> losses, double eta) {
  if (losses.empty()) throw std::invalid_argument("cvar_empirical: no losses");
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("cvar_empirical: eta must lie in (0, 1]");
  std::sort(losses.begin(), losses.end(), std::greater<>());
  const double n = static_cast<double>(losses.size());
  double mass = eta * n;
  double total = 0.0;
  for (double v : losses) {
    const double w = std::min(1.0, mass);
    if (w <= 0.0) break;
    total += w * v;
    mass -= w;
  }
  return total / (eta * n);
}

}  // namespace wassos
