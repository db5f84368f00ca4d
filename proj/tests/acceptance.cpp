// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wassos/apps.hpp"
#include "wassos/backend.hpp"
#include "wassos/hierarchy.hpp"
#include "wassos/oracle.hpp"
#include "wassos/rng.hpp"

using namespace wassos;

namespace {

constexpr double kSaturationTol = 1e-2;
constexpr double kMaxSecondsPerInstance = 120.0;
constexpr double kEmpiricalTol = 1e-3;
constexpr double kAnalyticTol = 1e-4;
constexpr double kLevelTol = 1e-6;
constexpr double kSandwichTol = 1e-5;
constexpr double kResidualTol = 1e-5;
constexpr double kPlateauTol = 1e-2;
constexpr double kReconstructionTol = 1e-6;

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail, double seconds) {
  std::printf("%s criterion %d: %s [%s; %.1f s]\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool optimal(const RelaxationSolution& s) { return s.result.status == SolveStatus::Optimal; }

DroModel revenue_instance(double eps, std::uint64_t seed) {
  RevenueModel rm = preset_paper_revenue().revenue;
  rm.eps = eps;
  return revenue_dro_model(rm, gen_revenue_samples(rm.R, rm.N, seed));
}

void revenue_saturation() {
  Timer t;
  const auto preset = preset_paper_revenue();
  bool pass = true;
  double worst = 0.0;
  double slowest = 0.0;
  int solved = 0;
  for (double eps : {6.0, 8.0, 10.0}) {
    for (int rep = 0; rep < preset.replications; ++rep) {
      const auto sol = solve_relaxation(build_ad(revenue_instance(eps, replication_seed(preset.seed, rep)), 2));
      slowest = std::max(slowest, sol.wall_ms / 1000.0);
      if (!optimal(sol)) {
        pass = false;
        continue;
      }
      ++solved;
      worst = std::max(worst, std::abs(-sol.bound - 14.0));
    }
  }
  pass = pass && worst <= kSaturationTol && slowest <= kMaxSecondsPerInstance;
  report(1, pass, "revenue bound is 14 for eps in {6, 8, 10}",
         std::to_string(solved) + " solves, max |bound - 14| = " + num(worst) + ", slowest " + num(slowest) + " s",
         t.seconds());
}

void empirical_limit() {
  Timer t;
  const auto preset = preset_paper_revenue();
  bool pass = true;
  double worst = 0.0;
  for (int rep = 0; rep < preset.replications; ++rep) {
    const DroModel model = revenue_instance(1e-4, replication_seed(preset.seed, rep));
    const auto sol = solve_relaxation(build_ad(model, 2));
    if (!optimal(sol)) {
      pass = false;
      continue;
    }
    const double revenue = -empirical_value(model.loss, model.samples);
    worst = std::max(worst, std::abs(-sol.bound - revenue));
  }
  pass = pass && worst <= kEmpiricalTol;
  report(2, pass, "revenue bound at eps = 1e-4 matches the empirical revenue",
         "max deviation " + num(worst) + " over " + std::to_string(preset.replications) + " replications",
         t.seconds());
}

DroModel unit_interval_linear(double eps) {
  DroModel m;
  m.support.dim = 1;
  m.support.norm_bound = 1.0;
  m.support.inequalities = {parse_poly("x1", 1), parse_poly("1 - x1", 1)};
  m.loss.pieces = {{parse_poly("x1", 1)}};
  m.samples.points = {{0.5}};
  m.radius = eps;
  m.tau = crude_tau_bounds(m.loss, 1.0);
  return m;
}

void analytic_case() {
  Timer t;
  const DroModel m = unit_interval_linear(0.1);
  bool pass = true;
  std::string detail;
  for (int r : {1, 2}) {
    const auto sol = solve_relaxation(build_adtilde(m, r));
    pass = pass && optimal(sol) && std::abs(sol.bound - 0.4) <= kAnalyticTol;
    detail += "r=" + std::to_string(r) + " bound " + std::to_string(sol.bound) + ", ";
  }
  const Grid grid = make_grid(m.support, 201);
  const double lp = grid_primal_bound(m, grid);
  pass = pass && std::abs(lp - 0.4) <= grid.spacing[0];
  detail += "grid LP " + std::to_string(lp) + " with spacing " + num(grid.spacing[0]);
  report(3, pass, "min-polynomial bound on the unit interval is 0.5 - eps", detail, t.seconds());
}

// Random small instances shared by criteria 4 to 6.
struct BatteryResult {
  int instances = 0;
  int solves = 0;
  int unsolved = 0;
  double worst_level = -INFINITY;
  double worst_sandwich = -INFINITY;
  double worst_residual = INFINITY;
  double seconds = 0.0;
};

Poly random_poly(Rng& rng, std::size_t n, int degree) {
  Poly p(n);
  for (const auto& e : monomial_basis(n, degree)) {
    if (e.degree() == degree || rng.uniform() < 0.6) p.add_term(e, rng.uniform(-1.0, 1.0));
  }
  return p;
}

SupportSet ball(std::size_t m, double R) {
  SupportSet s;
  s.dim = m;
  s.norm_bound = R;
  std::vector<double> origin(m, 0.0);
  s.inequalities = {Poly::constant(m, R * R) - squared_distance(origin)};
  return s;
}

// Two linear constraints in one dimension, the ball otherwise.
SupportSet support_for(std::size_t m, double R) {
  if (m > 1) return ball(m, R);
  SupportSet s;
  s.dim = 1;
  s.norm_bound = R;
  s.inequalities = {parse_poly("x1", 1) + Poly::constant(1, R), Poly::constant(1, R) - parse_poly("x1", 1)};
  return s;
}

Samples samples_in_ball(Rng& rng, std::size_t m, std::size_t N, double R) {
  Samples s;
  while (s.size() < N) {
    std::vector<double> p(m);
    double n2 = 0.0;
    for (auto& v : p) {
      v = rng.uniform(-R, R);
      n2 += v * v;
    }
    if (n2 <= R * R) s.points.push_back(p);
  }
  return s;
}

std::size_t lp_grid_size(std::size_t m) { return m == 1 ? 60 : 40; }
std::size_t dense_grid_size(std::size_t m) { return m == 1 ? 4001 : 301; }

void ad_instance(Rng& rng, BatteryResult& out) {
  const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() < 0.5);
  const std::size_t K = 1 + static_cast<std::size_t>(rng.uniform() < 0.5);
  const std::size_t J = 1 + static_cast<std::size_t>(rng.uniform() < 0.5);
  const std::size_t N = 2 + static_cast<std::size_t>(rng.uniform() * 4.0);
  DroModel model;
  model.support = support_for(m, 1.0);
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<Poly> row;
    for (std::size_t j = 0; j < J; ++j) row.push_back(random_poly(rng, m, 1 + static_cast<int>(rng.uniform() * 4.0)));
    model.loss.pieces.push_back(row);
  }
  model.samples = samples_in_ball(rng, m, N, 1.0);
  model.radius = rng.uniform(0.1, 1.0);
  model.tau = crude_tau_bounds(model.loss, 1.0);
  ++out.instances;

  const int r0 = minimum_level(model, HierarchyKind::AD);
  const Grid lp = make_grid(model.support, lp_grid_size(m));
  const Grid dense = make_grid(model.support, dense_grid_size(m));
  const double grid_value = grid_primal_bound(model, lp);
  std::vector<double> bounds;
  for (int r : {r0, r0 + 1}) {
    const auto sol = solve_relaxation(build_ad(model, r));
    ++out.solves;
    if (!optimal(sol)) {
      ++out.unsolved;
      return;
    }
    bounds.push_back(sol.bound);
    out.worst_sandwich = std::max(out.worst_sandwich, sol.bound - grid_value);
    out.worst_residual = std::min(out.worst_residual, semiinfinite_residual(sol.lambda, sol.alpha, model, dense));
  }
  // max-form chain: bound_r <= bound_{r+1}
  out.worst_level = std::max(out.worst_level, bounds[0] - bounds[1]);
}

void pd_instance(Rng& rng, BatteryResult& out) {
  PortfolioModel pm;
  pm.m = 1 + static_cast<std::size_t>(rng.uniform() < 0.5);
  for (std::size_t p = 0; p < pm.m; ++p) pm.costs.push_back(random_poly(rng, pm.m, 1 + static_cast<int>(rng.uniform() * 3.0)));
  pm.gamma = rng.uniform(0.0, 5.0);
  pm.eta = rng.uniform(0.2, 1.0);
  pm.R = 1.0;
  pm.N = 2 + static_cast<std::size_t>(rng.uniform() * 4.0);
  pm.eps = rng.uniform(0.1, 1.0);
  pm.samples = samples_in_ball(rng, pm.m, pm.N, pm.R);
  ++out.instances;

  const SupportSet support = ball(pm.m, pm.R);
  const Grid lp = make_grid(support, lp_grid_size(pm.m));
  const Grid dense = make_grid(support, dense_grid_size(pm.m));
  const int r0 = minimum_level(pm);
  std::vector<double> bounds;
  for (int r : {r0, r0 + 1}) {
    const auto sol = solve_relaxation(build_pd(pm, r));
    ++out.solves;
    if (!optimal(sol)) {
      ++out.unsolved;
      return;
    }
    bounds.push_back(sol.bound);
    // The worst case of the loss at the solved (y, tau), written as a min-form model.
    const auto coef = portfolio_piece_coefficients(pm.gamma, pm.eta);
    Poly total(pm.m);
    for (std::size_t p = 0; p < pm.m; ++p) total = total + pm.costs[p] * sol.weights[p];
    DroModel neg;
    neg.support = support;
    for (std::size_t k = 0; k < 2; ++k) {
      neg.loss.pieces.push_back({-(total * coef.scale[k] + Poly::constant(pm.m, coef.tau_coef[k] * sol.tau))});
    }
    neg.samples = pm.samples;
    neg.radius = pm.eps;
    neg.tau = crude_tau_bounds(neg.loss, pm.R);
    out.worst_sandwich = std::max(out.worst_sandwich, -sol.bound - grid_primal_bound(neg, lp));
    out.worst_residual = std::min(out.worst_residual, semiinfinite_residual(sol.lambda, sol.alpha, neg, dense));
  }
  // min-form chain: bound_r >= bound_{r+1}
  out.worst_level = std::max(out.worst_level, bounds[1] - bounds[0]);
}

BatteryResult run_battery() {
  Timer t;
  BatteryResult out;
  Rng rng(20240601);
  for (int i = 0; i < 14; ++i) ad_instance(rng, out);
  for (int i = 0; i < 8; ++i) pd_instance(rng, out);
  out.seconds = t.seconds();
  return out;
}

void battery_criteria() {
  const BatteryResult b = run_battery();
  const std::string base = std::to_string(b.instances) + " instances, " + std::to_string(b.solves) + " solves, " +
                           std::to_string(b.unsolved) + " not optimal";
  const bool solved = b.unsolved == 0 && b.instances >= 20;
  report(4, solved && b.worst_level <= kLevelTol, "level monotonicity on random instances",
         base + ", worst violation " + num(b.worst_level), b.seconds);
  report(5, solved && b.worst_sandwich <= kSandwichTol, "hierarchy bounds lie below the grid LP",
         base + ", worst excess " + num(b.worst_sandwich), 0.0);
  report(6, solved && b.worst_residual >= -kResidualTol, "solved multipliers are feasible on a dense grid",
         base + ", smallest residual " + num(b.worst_residual), 0.0);
}

void portfolio_plateau() {
  Timer t;
  const auto preset = preset_paper_portfolio();
  SweepProblem problem;
  problem.kind = "pd";
  problem.build = [&](double eps, int r, std::uint64_t seed) {
    PortfolioModel pm = preset.portfolio;
    pm.eps = eps;
    return build_pd(portfolio_instance(pm, seed), r);
  };
  problem.report = [](const RelaxationSolution& s) { return s.bound; };
  const std::vector<double> radii = {1e-3, 1e-2, 0.1, 1.0, 5.0, 10.0};
  const BoundSweep result = sweep(problem, {2, 3}, radii, preset.replications, preset.seed, SolverOptions{});
  bool pass = true;
  for (const auto& row : result.rows) pass = pass && row.status == "optimal";
  const double plateau = std::abs(result.find(5.0, 2)->mean - result.find(10.0, 2)->mean);
  double worst = -INFINITY;
  for (double eps : radii) worst = std::max(worst, result.find(eps, 3)->mean - result.find(eps, 2)->mean);
  pass = pass && plateau <= kPlateauTol && worst <= kLevelTol;
  report(7, pass, "portfolio bound flattens in eps and does not increase with r",
         "|obj(5) - obj(10)| = " + num(plateau) + ", worst mean increase r2->r3 " + num(worst) + " over " +
             std::to_string(radii.size()) + " radii x " + std::to_string(preset.replications) + " reps",
         t.seconds());
}

void sos_compiler() {
  Timer t;
  Rng rng(77);
  int feasible = 0;
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
    const int r = 1 + static_cast<int>(rng.uniform() * 3.0);
    Poly sum(n);
    for (int q = 0; q < 2; ++q) {
      const Poly f = random_poly(rng, n, r);
      sum = sum + f * f;
    }
    SdpProblem p;
    PolyExpr identity(sum);
    const GramVar s = p.assert_is_sos(identity, 2 * r);
    identity.add(s, Poly::constant(n, -1.0));
    std::vector<std::size_t> index;
    const auto res = solve(compile(p, &index));
    if (res.status != SolveStatus::Optimal) continue;
    ++feasible;
    worst = std::max(worst, evaluate_expr(identity, scalar_values(index, res), res.blocks).max_abs_coefficient());
  }
  bool infeasible = true;
  {
    SdpProblem p;
    p.assert_is_sos(PolyExpr(Poly::constant(1, -1.0)), 0);
    infeasible = infeasible && solve(compile(p)).status == SolveStatus::Infeasible;
  }
  {
    SdpProblem p;
    p.assert_is_sos(PolyExpr(Poly::variable(1, 0)), 2);
    infeasible = infeasible && solve(compile(p)).status == SolveStatus::Infeasible;
  }
  const bool pass = feasible == 100 && infeasible && worst <= kReconstructionTol;
  report(8, pass, "SOS compiler certifies random squares and rejects -1 and x",
         std::to_string(feasible) + "/100 feasible, max reconstruction residual " + num(worst) +
             (infeasible ? ", both infeasible" : ", infeasibility missed"),
         t.seconds());
}

void sdpa_roundtrip() {
  Timer t;
  ConicStandardForm toy;
  toy.block_sizes = {2};
  toy.rows.push_back({{{0, 0, 0, 1.0}}, {}});
  toy.rows.push_back({{{0, 1, 1, 1.0}}, {}});
  toy.rhs = {1.0, 1.0};
  toy.objective.psd = {{0, 0, 1, 1.0}};
  toy.sense = Sense::Maximize;
  const std::vector<std::pair<std::string, ConicStandardForm>> cases = {
      {"toy", toy},
      {"revenue-r2", compile(build_ad(revenue_instance(10.0, 1), 2).problem)},
      {"portfolio-r2", compile(build_pd(portfolio_instance(preset_paper_portfolio().portfolio, 1), 2).problem)}};
  bool pass = true;
  std::string detail;
  for (const auto& [name, form] : cases) {
    const std::string first = export_sdpa_string(form);
    ConicStandardForm parsed = parse_sdpa_string(first);
    const bool bytes = export_sdpa_string(parsed) == first;
    ConicStandardForm expected = form;
    expected.canonicalize();
    parsed.canonicalize();
    const bool same = parsed == expected;
    pass = pass && bytes && same;
    detail += name + (bytes && same ? " ok" : " mismatch") + " (" + std::to_string(first.size()) + " bytes), ";
  }
  detail.resize(detail.size() - 2);
  report(9, pass, "SDPA export and parse round-trip byte for byte", detail, t.seconds());
}

void dimension_growth() {
  Timer t;
  const auto rev = preset_scal_revenue();
  const auto port = preset_scal_portfolio();
  std::map<std::pair<std::size_t, std::size_t>, Dimensions> revenue;
  std::map<std::pair<std::size_t, std::size_t>, Dimensions> portfolio;
  for (const auto& [K, N] : rev.scale_grid) {
    RevenueModel rm = rev.revenue;
    rm.customers = gen_customers(K, rm.R, rev.seed);
    rm.N = N;
    rm.eps = rev.radii.front();
    revenue[{K, N}] = dimensions(build_ad(revenue_dro_model(rm, gen_revenue_samples(rm.R, N, rev.seed)), 2).problem);
  }
  for (const auto& [m, N] : port.scale_grid) {
    PortfolioModel pm = port.portfolio;
    pm.m = m;
    pm.costs = portfolio_costs(m);
    pm.N = N;
    pm.eps = port.radii.front();
    portfolio[{m, N}] = dimensions(build_pd(portfolio_instance(pm, port.seed), 2).problem);
  }
  const auto grows = [](const Dimensions& a, const Dimensions& b) {
    return a.psd_blocks <= b.psd_blocks && a.scalar_variables <= b.scalar_variables &&
           a.gram_entries < b.gram_entries && a.equality_rows < b.equality_rows;
  };
  const auto monotone = [&](const std::map<std::pair<std::size_t, std::size_t>, Dimensions>& dims) {
    bool ok = true;
    for (const auto& [key, d] : dims) {
      for (const auto& [other, e] : dims) {
        const bool larger = other.first >= key.first && other.second >= key.second && other != key;
        if (larger && !grows(d, e)) ok = false;
      }
    }
    return ok;
  };
  const bool pass = monotone(revenue) && monotone(portfolio);
  const auto& rbig = revenue.rbegin()->second;
  const auto& pbig = portfolio.rbegin()->second;
  report(10, pass, "relaxation sizes grow with K, m and N",
         "revenue K=12 N=150: " + std::to_string(rbig.psd_blocks) + " blocks, " +
             std::to_string(rbig.equality_rows) + " rows; portfolio m=12 N=150: " +
             std::to_string(pbig.psd_blocks) + " blocks, " + std::to_string(pbig.equality_rows) + " rows",
         t.seconds());
}

}  // namespace

int main() {
  revenue_saturation();
  empirical_limit();
  analytic_case();
  battery_criteria();
  portfolio_plateau();
  sos_compiler();
  sdpa_roundtrip();
  dimension_growth();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
