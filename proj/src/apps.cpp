#include "wassos/apps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wassos/rng.hpp"

namespace wassos {

std::vector<std::string> validate(const RevenueModel& rm) {
  std::vector<std::string> out;
  if (rm.customers.empty()) out.push_back("need at least one customer");
  for (std::size_t k = 0; k < rm.customers.size(); ++k) {
    const auto& c = rm.customers[k];
    const std::string who = "customer " + std::to_string(k);
    if (!(c.a > 0.0)) out.push_back(who + ": a must be positive");
    if (c.b < 0.0) out.push_back(who + ": b must be nonnegative");
    if (c.d < 0.0) out.push_back(who + ": d must be nonnegative");
    if (-c.a * c.b * c.b * c.b + c.d < 0.0) out.push_back(who + ": needs -a b^3 + d >= 0");
  }
  if (!(rm.R > 0.0)) out.push_back("R must be positive");
  if (rm.N == 0) out.push_back("N must be positive");
  if (!(rm.eps > 0.0)) out.push_back("eps must be positive");
  return out;
}

std::vector<std::string> validate(const PortfolioModel& pm) {
  std::vector<std::string> out;
  if (pm.m == 0) out.push_back("need at least one asset");
  if (pm.costs.size() != pm.m) out.push_back("need one cost polynomial per asset");
  for (const auto& c : pm.costs) {
    if (c.nvars() != pm.m) out.push_back("cost polynomial has wrong dimension");
  }
  if (!(pm.eta > 0.0 && pm.eta <= 1.0)) out.push_back("eta must lie in (0, 1]");
  if (pm.gamma < 0.0) out.push_back("gamma must be nonnegative");
  if (!(pm.R > 0.0)) out.push_back("R must be positive");
  if (!(pm.eps > 0.0)) out.push_back("eps must be positive");
  for (std::size_t i = 0; i < pm.samples.size(); ++i) {
    const auto& p = pm.samples.points[i];
    double n2 = 0.0;
    for (double v : p) n2 += v * v;
    if (p.size() != pm.m || std::sqrt(n2) > pm.R + kSampleMembershipTol) {
      out.push_back("sample " + std::to_string(i) + " lies outside the support");
    }
  }
  return out;
}

RevenueLoss revenue_loss(const RevenueModel& rm) {
  RevenueLoss out;
  const Poly xi = Poly::variable(1, 0);
  for (const auto& c : rm.customers) {
    const Poly shift = xi - Poly::constant(1, c.b);
    const Poly g1 = -(c.a * (shift * shift * shift)) - Poly::constant(1, c.d);
    const Poly g2 = Poly::constant(1, -c.d);
    out.loss.pieces.push_back({g1, g2});
  }
  out.support.dim = 1;
  out.support.inequalities = {xi, Poly::constant(1, rm.R) - xi};
  out.support.norm_bound = rm.R;
  return out;
}

double revenue_value(const RevenueModel& rm, double xi) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : rm.customers) {
    const double t = xi - c.b;
    best = std::max(best, std::min(c.a * t * t * t + c.d, c.d));
  }
  return best;
}

DroModel revenue_dro_model(const RevenueModel& rm, const Samples& samples) {
  RevenueLoss rl = revenue_loss(rm);
  DroModel model;
  model.support = std::move(rl.support);
  model.loss = std::move(rl.loss);
  model.samples = samples;
  model.radius = rm.eps;
  model.tau = crude_tau_bounds(model.loss, model.support.norm_bound);
  return model;
}

PortfolioPieceCoefficients portfolio_piece_coefficients(double gamma, double eta) {
  PortfolioPieceCoefficients c;
  c.scale = {1.0, 1.0 + gamma / eta};
  c.tau_coef = {gamma, (1.0 - 1.0 / eta) * gamma};
  return c;
}

std::array<PolyExpr, 2> portfolio_pieces(const PortfolioModel& pm, const std::vector<ScalarVar>& y,
                                         ScalarVar tau) {
  if (y.size() != pm.m || pm.costs.size() != pm.m) {
    throw std::invalid_argument("portfolio_pieces: need one weight per asset");
  }
  const auto coef = portfolio_piece_coefficients(pm.gamma, pm.eta);
  std::array<PolyExpr, 2> out{PolyExpr(pm.m), PolyExpr(pm.m)};
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t p = 0; p < pm.m; ++p) out[k].add(y[p], pm.costs[p] * coef.scale[k]);
    out[k].add(tau, Poly::constant(pm.m, coef.tau_coef[k]));
  }
  return out;
}

double portfolio_loss(const PortfolioModel& pm, const std::vector<double>& y, double tau,
                      std::span<const double> xi) {
  const auto coef = portfolio_piece_coefficients(pm.gamma, pm.eta);
  double total = 0.0;
  for (std::size_t p = 0; p < pm.m; ++p) total += y.at(p) * pm.costs[p].eval(xi);
  return std::max(coef.scale[0] * total + coef.tau_coef[0] * tau,
                  coef.scale[1] * total + coef.tau_coef[1] * tau);
}

std::vector<Poly> portfolio_costs(std::size_t m) {
  if (m < 3) throw std::invalid_argument("portfolio_costs: the cost family needs m >= 3");
  std::vector<Poly> c;
  c.push_back(parse_poly("-1 + x1 + x1*x2 - x1*x3 - 2*x1^3", m));
  c.push_back(parse_poly("-1 - x1*x2 + x2^2 - x2*x3 + x2^3", m));
  c.push_back(parse_poly("-1 + x2*x3 - x3^2 - x3^3", m));
  for (std::size_t p = 3; p < m; ++p) {
    std::vector<int> e(m, 0);
    e[p] = 3;
    c.push_back(Poly::monomial(Exponent(e), -1.0));
  }
  return c;
}

Samples gen_revenue_samples(double R, std::size_t N, std::uint64_t seed) {
  Rng rng(seed);
  Samples s;
  for (std::size_t i = 0; i < N; ++i) {
    const double v = std::clamp(rng.normal(R / 2.0, R / 7.0), 0.0, R);
    s.points.push_back({v});
  }
  return s;
}

Samples gen_sphere_samples(std::size_t m, std::size_t N, std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("gen_sphere_samples: m must be positive");
  Rng rng(seed);
  Samples s;
  while (s.points.size() < N) {
    std::vector<double> p(m);
    double n2 = 0.0;
    for (auto& v : p) {
      v = rng.normal();
      n2 += v * v;
    }
    if (n2 < 1e-24) continue;
    const double n = std::sqrt(n2);
    for (auto& v : p) v /= n;
    s.points.push_back(std::move(p));
  }
  return s;
}

std::vector<Customer> gen_customers(std::size_t K, double R, std::uint64_t seed) {
  std::vector<Customer> out = {{4.0, 0.75, 9.0}, {0.25, 3.5, 11.0}, {1.0 / 110.0, 11.5, 14.0}};
  if (K <= out.size()) {
    out.resize(K);
    return out;
  }
  Rng rng(seed);
  while (out.size() < K) {
    Customer c;
    c.a = 4.0 * (1.0 - rng.uniform());  // (0, 4]
    c.b = rng.uniform(0.0, R);
    c.d = rng.uniform(0.0, 14.0);
    if (-c.a * c.b * c.b * c.b + c.d >= 0.0) out.push_back(c);
  }
  return out;
}

PortfolioModel portfolio_instance(const PortfolioModel& params, std::uint64_t seed) {
  PortfolioModel pm = params;
  if (pm.costs.size() != pm.m) pm.costs = portfolio_costs(pm.m);
  Samples unit = gen_sphere_samples(pm.m, pm.N, seed);
  for (auto& p : unit.points) {
    for (auto& v : p) v *= pm.R;
  }
  pm.samples = std::move(unit);
  return pm;
}

std::string to_string(HierarchyKind kind) {
  switch (kind) {
    case HierarchyKind::AD:
      return "ad";
    case HierarchyKind::ADTilde:
      return "adtilde";
    case HierarchyKind::FD:
      return "fd";
    case HierarchyKind::PD:
      return "pd";
  }
  return "?";
}

std::optional<HierarchyKind> parse_hierarchy_kind(const std::string& text) {
  if (text == "ad") return HierarchyKind::AD;
  if (text == "adtilde") return HierarchyKind::ADTilde;
  if (text == "fd") return HierarchyKind::FD;
  if (text == "pd") return HierarchyKind::PD;
  return std::nullopt;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi >= lo) || n == 0) throw std::invalid_argument("log_grid: need 0 < lo <= hi, n >= 1");
  std::vector<double> out;
  if (n == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t t = 0; t < n; ++t) {
    out.push_back(t + 1 == n ? hi : std::pow(10.0, a + (b - a) * static_cast<double>(t) / (n - 1)));
  }
  out.front() = lo;
  return out;
}

namespace {

constexpr std::size_t kDefaultRadii = 25;

}  // namespace

ExperimentPreset preset_paper_revenue() {
  ExperimentPreset p;
  p.name = "paper-revenue";
  p.app = "revenue";
  p.kind = HierarchyKind::AD;
  p.levels = {2};
  p.radii = log_grid(1e-3, 10.0, kDefaultRadii);
  p.replications = 10;
  p.seed = 1;
  p.revenue.customers = gen_customers(3, 12.0, 0);
  p.revenue.R = 12.0;
  p.revenue.N = 30;
  p.revenue.eps = 10.0;
  return p;
}

ExperimentPreset preset_paper_portfolio() {
  ExperimentPreset p;
  p.name = "paper-portfolio";
  p.app = "portfolio";
  p.kind = HierarchyKind::PD;
  p.levels = {2, 3};
  p.radii = log_grid(1e-3, 10.0, kDefaultRadii);
  p.replications = 10;
  p.seed = 1;
  p.portfolio.m = 3;
  p.portfolio.costs = portfolio_costs(3);
  p.portfolio.gamma = 10.0;
  p.portfolio.eta = 0.2;
  p.portfolio.R = 1.0;
  p.portfolio.N = 30;
  p.portfolio.eps = 10.0;
  return p;
}

ExperimentPreset preset_scal_revenue() {
  ExperimentPreset p = preset_paper_revenue();
  p.name = "scal-revenue";
  p.radii = {10.0};
  p.replications = 1;
  for (std::size_t K : {3, 6, 9, 12}) {
    for (std::size_t N : {30, 60, 90, 120, 150}) p.scale_grid.emplace_back(K, N);
  }
  return p;
}

ExperimentPreset preset_scal_portfolio() {
  ExperimentPreset p = preset_paper_portfolio();
  p.name = "scal-portfolio";
  p.levels = {2};
  p.radii = {10.0};
  p.replications = 1;
  for (std::size_t m : {3, 6, 9, 12}) {
    for (std::size_t N : {30, 60, 90, 120, 150}) p.scale_grid.emplace_back(m, N);
  }
  return p;
}

std::optional<ExperimentPreset> find_preset(const std::string& name) {
  if (name == "paper-revenue") return preset_paper_revenue();
  if (name == "paper-portfolio") return preset_paper_portfolio();
  if (name == "scal-revenue") return preset_scal_revenue();
  if (name == "scal-portfolio") return preset_scal_portfolio();
  return std::nullopt;
}

}  // namespace wassos
