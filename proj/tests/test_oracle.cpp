#include <doctest.h>

#include <cmath>

#include "wassos/apps.hpp"
#include "wassos/hierarchy.hpp"
#include "wassos/oracle.hpp"

using namespace wassos;

namespace {

SupportSet interval(double R) {
  SupportSet s;
  s.dim = 1;
  s.norm_bound = R;
  s.inequalities = {parse_poly("x1", 1), Poly::constant(1, R) - parse_poly("x1", 1)};
  return s;
}

DroModel linear_model(double eps) {
  DroModel m;
  m.support = interval(1.0);
  m.loss.pieces = {{parse_poly("x1", 1)}};
  m.samples.points = {{0.5}};
  m.radius = eps;
  m.tau = crude_tau_bounds(m.loss, 1.0);
  return m;
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid g = make_grid(interval(12.0), 25);
  CHECK(g.points.size() == 25);
  CHECK(g.points.front()[0] == 0.0);
  CHECK(g.points.back()[0] == 12.0);
  CHECK(g.spacing[0] == doctest::Approx(0.5));
  for (const auto& p : g.points) CHECK(interval(12.0).contains(p, 1e-12));

  SupportSet ball;
  ball.dim = 2;
  ball.norm_bound = 1.0;
  ball.inequalities = {parse_poly("1 - x1^2 - x2^2", 2)};
  CHECK(make_grid(ball, 3).points.size() == 5);

  const Grid two = make_grid(interval(1.0), 2);
  REQUIRE(two.points.size() == 2);
  CHECK(two.points[0][0] == 0.0);
  CHECK(two.points[1][0] == 1.0);

  CHECK_THROWS(make_grid(interval(1.0), 1));
  SupportSet big;
  big.dim = 5;
  CHECK_THROWS(make_grid(big, 3));
}

TEST_CASE("empirical value") {
  PiecewiseLoss c;
  c.pieces = {{Poly::constant(1, 2.5)}};
  Samples s;
  s.points = {{0.1}, {0.7}, {0.3}};
  CHECK(empirical_value(c, s) == 2.5);

  PiecewiseLoss lin;
  lin.pieces = {{parse_poly("x1", 1)}};
  Samples two;
  two.points = {{0.0}, {1.0}};
  CHECK(empirical_value(lin, two) == 0.5);

  RevenueModel rm = preset_paper_revenue().revenue;
  const auto rl = revenue_loss(rm);
  for (const auto& c : rm.customers) {
    Samples at;
    at.points = {{c.b}};
    CHECK(empirical_value(rl.loss, at) == doctest::Approx(-revenue_value(rm, c.b)));
  }
}

TEST_CASE("grid primal bound") {
  const DroModel m = linear_model(0.1);
  const Grid fine = make_grid(m.support, 201);
  CHECK(std::abs(grid_primal_bound(m, fine) - 0.4) <= fine.spacing[0]);

  const DroModel wide = linear_model(5.0);
  CHECK(grid_primal_bound(wide, fine) == doctest::Approx(0.0).epsilon(1e-7));

  DroModel tiny = linear_model(1e-6);
  tiny.samples.points = {{0.25}, {0.75}};
  CHECK(std::abs(grid_primal_bound(tiny, make_grid(tiny.support, 5)) - 0.5) <= 1e-5);

  const Grid coarse = make_grid(m.support, 11);
  CHECK(grid_primal_bound(m, fine) <= grid_primal_bound(m, coarse) + 1e-7);
}

TEST_CASE("semi-infinite residual") {
  const DroModel m = linear_model(0.1);
  const Grid g = make_grid(m.support, 101);
  CHECK(semiinfinite_residual(0.0, {-1e10}, m, g) > 1e9);
  CHECK(semiinfinite_residual(0.0, {1.0}, m, g) == doctest::Approx(-1.0));

  const auto sol = solve_relaxation(build_adtilde(m, 1));
  REQUIRE(sol.result.status == SolveStatus::Optimal);
  CHECK(semiinfinite_residual(sol.lambda, sol.alpha, m, g) >= -1e-5);
}

TEST_CASE("solved revenue multipliers are feasible on a grid") {
  RevenueModel rm = preset_paper_revenue().revenue;
  rm.eps = 1.0;
  const DroModel model = revenue_dro_model(rm, gen_revenue_samples(rm.R, rm.N, 1));
  const auto sol = solve_relaxation(build_ad(model, 2));
  REQUIRE(sol.result.status == SolveStatus::Optimal);
  const Grid grid = make_grid(model.support, 2401);
  CHECK(semiinfinite_residual(sol.lambda, sol.alpha, model, grid) >= -1e-5);
  CHECK(sol.bound <= grid_primal_bound(model, make_grid(model.support, 49)) + 1e-5);
}

TEST_CASE("empirical cvar") {
  CHECK(cvar_empirical({1, 2, 3, 4}, 0.5) == doctest::Approx(3.5));
  CHECK(cvar_empirical({4, 1, 3, 2}, 1.0) == doctest::Approx(2.5));
  CHECK(cvar_empirical({7, 7, 7}, 0.3) == doctest::Approx(7.0));
  CHECK(cvar_empirical({1, 2, 3, 4, 5}, 0.3) == doctest::Approx((5.0 + 4.0 * 0.5) / 1.5));
  const std::vector<double> x = {0.3, -1.2, 2.5, 0.9, 1.7, -0.4};
  for (double eta : {0.1, 0.25, 0.5, 0.8, 1.0}) {
    std::vector<double> shifted = x;
    std::vector<double> scaled = x;
    for (auto& v : shifted) v += 3.0;
    for (auto& v : scaled) v *= 2.0;
    CHECK(cvar_empirical(shifted, eta) == doctest::Approx(cvar_empirical(x, eta) + 3.0));
    CHECK(cvar_empirical(scaled, eta) == doctest::Approx(2.0 * cvar_empirical(x, eta)));
  }
  CHECK_THROWS(cvar_empirical({}, 0.5));
  CHECK_THROWS(cvar_empirical({1.0}, 0.0));
}
