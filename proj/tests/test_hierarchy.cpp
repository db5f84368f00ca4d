#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "wassos/apps.hpp"
#include "wassos/hierarchy.hpp"
#include "wassos/oracle.hpp"

using namespace wassos;

namespace {

DroModel unit_interval(const Poly& g, std::vector<double> samples, double eps) {
  DroModel m;
  m.support.dim = 1;
  m.support.norm_bound = 1.0;
  m.support.inequalities = {parse_poly("x1", 1), parse_poly("1 - x1", 1)};
  m.loss.pieces = {{g}};
  for (double s : samples) m.samples.points.push_back({s});
  m.radius = eps;
  m.tau = crude_tau_bounds(m.loss, 1.0);
  return m;
}

DroModel revenue_model(double eps, std::uint64_t seed) {
  RevenueModel rm = preset_paper_revenue().revenue;
  rm.eps = eps;
  return revenue_dro_model(rm, gen_revenue_samples(rm.R, rm.N, seed));
}

PortfolioModel small_portfolio(double eps, std::size_t N, std::uint64_t seed) {
  PortfolioModel pm = preset_paper_portfolio().portfolio;
  pm.eps = eps;
  pm.N = N;
  return portfolio_instance(pm, seed);
}

double value(const Relaxation& relax) {
  const auto sol = solve_relaxation(relax);
  REQUIRE(sol.result.status == SolveStatus::Optimal);
  return sol.bound;
}

}  // namespace

TEST_CASE("revenue AD_2 block count") {
  const auto relax = build_ad(revenue_model(1.0, 1), 2);
  const auto d = dimensions(relax.problem);
  CHECK(d.psd_blocks == 3 * 30 * (1 + 2 + 4));
  CHECK(d.largest_block == 6);
  CHECK(d.scalar_variables == 31);
  CHECK(relax.alpha.size() == 30);
  CHECK(relax.lambda_scale == 144.0);
  CHECK(relax.identities.size() == 90);
}

TEST_CASE("level too small names the minimum") {
  const DroModel model = revenue_model(1.0, 1);
  CHECK(minimum_level(model, HierarchyKind::AD) == 2);
  try {
    build_ad(model, 1);
    FAIL("expected LevelTooSmall");
  } catch (const LevelTooSmall& e) {
    CHECK(e.min_level() == 2);
    CHECK(std::string(e.what()).find("r = 2") != std::string::npos);
  }
  CHECK(minimum_level(small_portfolio(1.0, 3, 1)) == 2);
  CHECK_THROWS_AS(build_pd(small_portfolio(1.0, 3, 1), 1), LevelTooSmall);
}

TEST_CASE("objective of a single-sample model") {
  const auto relax = build_ad(unit_interval(parse_poly("x1", 1), {0.0}, 0.3), 1);
  CHECK(relax.problem.sense() == Sense::Maximize);
  const auto& obj = relax.problem.objective();
  REQUIRE(obj.size() == 2);
  CHECK(obj[0].first == relax.lambda.id);
  CHECK(obj[0].second == doctest::Approx(-0.09));
  CHECK(obj[1].first == relax.alpha[0].id);
  CHECK(obj[1].second == 1.0);
}

TEST_CASE("zero loss reduces to a Putinar certificate") {
  DroModel m = unit_interval(Poly(1), {0.5}, 0.2);
  const auto relax = build_ad(m, 1);
  CHECK(dimensions(relax.problem).psd_blocks == 1 + 2 + 1 + 2);
  CHECK(std::abs(value(relax)) <= 1e-6);
}

TEST_CASE("min-polynomial hierarchy on the unit interval") {
  for (double eps : {0.05, 0.1, 0.3}) {
    const auto relax = build_adtilde(unit_interval(parse_poly("x1", 1), {0.5}, eps), 1);
    CHECK(dimensions(relax.problem).psd_blocks == 3);
    CHECK(std::abs(value(relax) - (0.5 - eps)) <= 1e-4);
  }
  CHECK(std::abs(value(build_adtilde(unit_interval(parse_poly("x1", 1), {0.5}, 1e-5), 1)) - 0.5) <= 1e-4);
  CHECK(std::abs(value(build_adtilde(unit_interval(Poly::constant(1, 0.7), {0.2, 0.9}, 0.4), 1)) - 0.7) <=
        1e-6);
  CHECK_THROWS(build_adtilde(revenue_model(1.0, 1), 2));
}

TEST_CASE("lifted and unlifted hierarchies agree for J = 1") {
  const DroModel m = unit_interval(parse_poly("x1", 1), {0.5}, 0.1);
  CHECK(value(build_ad(m, 1)) == doctest::Approx(0.4).epsilon(1e-4));
}

TEST_CASE("convex hierarchy") {
  DroModel m = unit_interval(parse_poly("(x1 - 0.3)^2", 1), {0.2, 0.6, 0.9}, 0.15);
  CHECK_THROWS(build_fd(m, 1));
  m.convex = true;
  const double fd = value(build_fd(m, 1));
  CHECK(fd == doctest::Approx(value(build_adtilde(m, 1))).epsilon(1e-6));
  CHECK(std::abs(value(build_fd(m, 2)) - fd) <= 1e-6);
  const auto relax = build_fd(m, 1);
  CHECK(relax.delta.size() == 3);

  DroModel two = unit_interval(parse_poly("x1^2", 1), {0.4, 0.8}, 0.1);
  two.loss.pieces = {{parse_poly("x1^2", 1), parse_poly("2*x1 - 1", 1)}};
  two.tau = crude_tau_bounds(two.loss, 1.0);
  two.convex = true;
  const double bound = value(build_fd(two, 1));
  const Grid grid = make_grid(two.support, 400);
  CHECK(bound <= grid_primal_bound(two, grid) + 1e-5);
}

TEST_CASE("level monotonicity on revenue") {
  const DroModel m = revenue_model(0.5, 3);
  const double r2 = value(build_ad(m, 2));
  const double r3 = value(build_ad(m, 3));
  CHECK(r2 <= r3 + 1e-6);
}

TEST_CASE("portfolio hierarchy") {
  const PortfolioModel pm = small_portfolio(0.5, 6, 2);
  const auto r2 = build_pd(pm, 2);
  CHECK(r2.weights.size() == 3);
  CHECK(r2.problem.sense() == Sense::Minimize);
  CHECK(dimensions(r2.problem).psd_blocks == 6 * 2 * 2);
  const auto s2 = solve_relaxation(r2);
  REQUIRE(s2.result.status == SolveStatus::Optimal);
  double total = 0.0;
  for (double y : s2.weights) {
    CHECK(y >= -1e-7);
    total += y;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s2.identity_residual <= 1e-6);
  const double b3 = value(build_pd(pm, 3));
  CHECK(s2.bound >= b3 - 1e-6);
}

TEST_CASE("portfolio with one asset matches the empirical risk") {
  PortfolioModel pm;
  pm.m = 1;
  pm.costs = {parse_poly("x1 + 0.5*x1^2", 1)};
  pm.gamma = 2.0;
  pm.eta = 0.25;
  pm.R = 1.0;
  pm.N = 8;
  pm.eps = 1e-5;
  pm = portfolio_instance(pm, 4);
  for (auto& p : pm.samples.points) p[0] *= 0.5;
  std::vector<double> losses;
  for (const auto& p : pm.samples.points) losses.push_back(pm.costs[0].eval(p));
  double mean = 0.0;
  for (double l : losses) mean += l / static_cast<double>(losses.size());
  const double empirical = mean + pm.gamma * cvar_empirical(losses, pm.eta);

  double scan = std::numeric_limits<double>::infinity();
  for (double tau : losses) {
    double s = 0.0;
    for (const auto& p : pm.samples.points) s += portfolio_loss(pm, {1.0}, tau, p);
    scan = std::min(scan, s / static_cast<double>(pm.samples.size()));
  }
  CHECK(scan == doctest::Approx(empirical).epsilon(1e-9));
  CHECK(std::abs(value(build_pd(pm, 1)) - scan) <= 1e-3);
}

TEST_CASE("portfolio without the risk term") {
  PortfolioModel pm = small_portfolio(0.3, 5, 3);
  pm.gamma = 0.0;
  const auto relax = build_pd(pm, 2);
  const auto sol = solve_relaxation(relax);
  REQUIRE(sol.result.status == SolveStatus::Optimal);
  CHECK(sol.identity_residual <= 1e-6);
}

TEST_CASE("quantile") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.2) == doctest::Approx(1.2));
  CHECK(quantile({5.0}, 0.8) == 5.0);
  CHECK(std::isnan(quantile({}, 0.5)));
}

TEST_CASE("sweep rows, aggregates and failures") {
  SweepProblem problem;
  problem.kind = "adtilde";
  problem.build = [](double eps, int r, std::uint64_t seed) {
    const double s = 0.4 + 0.01 * static_cast<double>(seed % 5);
    return build_adtilde(unit_interval(parse_poly("x1", 1), {s}, eps), r);
  };
  problem.report = [](const RelaxationSolution& sol) { return sol.bound; };
  const auto out = sweep(problem, {0, 1}, {0.05, 0.1}, 3, 7, SolverOptions{}, 2);
  CHECK(out.rows.size() == 2 * 2 * 3);
  CHECK(out.aggregates.size() == 4);
  for (const auto& row : out.rows) {
    if (row.r == 0) {
      CHECK(row.status == "level-too-small");
      CHECK(std::isnan(row.bound));
    } else {
      CHECK(row.status == "optimal");
      CHECK(row.seed == 7 + static_cast<std::uint64_t>(row.rep));
    }
  }
  const auto* a = out.find(0.1, 1);
  REQUIRE(a != nullptr);
  CHECK(a->count == 3);
  CHECK(a->mean == doctest::Approx(0.33).epsilon(1e-4));
  CHECK(out.find(0.1, 0)->count == 0);
  CHECK(out.find(0.2, 1) == nullptr);

  std::ostringstream csv;
  out.write_csv(csv, "test");
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# test");
  std::getline(in, line);
  CHECK(line == "kind,eps,r,rep,seed,status,bound,wall_ms,mean,q20,q80");
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 12 + 4);

  const auto single = sweep(problem, {1}, {0.1}, 1, 0, SolverOptions{});
  CHECK(single.rows.size() == 1);
  CHECK_THROWS(sweep(problem, {1}, {0.1}, 0, 0, SolverOptions{}));
}
