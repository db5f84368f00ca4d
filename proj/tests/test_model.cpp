#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wassos/apps.hpp"
#include "wassos/model.hpp"
#include "wassos/rng.hpp"

using namespace wassos;

namespace {

DroModel interval_model(const Poly& g, std::vector<double> samples) {
  DroModel m;
  m.support.dim = 1;
  m.support.norm_bound = 1.0;
  m.support.inequalities = {parse_poly("x1", 1), parse_poly("1 - x1", 1)};
  m.loss.pieces = {{g}};
  for (double s : samples) m.samples.points.push_back({s});
  m.radius = 0.1;
  m.tau = crude_tau_bounds(m.loss, 1.0);
  return m;
}

}  // namespace

TEST_CASE("crude tau bounds") {
  PiecewiseLoss cubic;
  cubic.pieces = {{parse_poly("-4*x1^3 + 9*x1^2 - 6.75*x1 - 7.3125", 1)}};
  const auto t = crude_tau_bounds(cubic, 12.0);
  REQUIRE(t.brackets.size() == 1);
  CHECK(t.brackets[0].first == doctest::Approx(8297.3125));
  CHECK(t.brackets[0].second == doctest::Approx(-8297.3125));

  PiecewiseLoss constant;
  constant.pieces = {{Poly::constant(1, -9.0)}};
  CHECK(crude_tau_bounds(constant, 3.0).brackets[0] == std::pair<double, double>(10.0, -10.0));

  PiecewiseLoss zero;
  zero.pieces = {{Poly(1)}};
  CHECK(crude_tau_bounds(zero, 5.0).brackets[0] == std::pair<double, double>(1.0, -1.0));
  CHECK_THROWS(crude_tau_bounds(zero, 0.0));
}

TEST_CASE("crude tau bounds bracket every piece on the ball") {
  PiecewiseLoss loss;
  loss.pieces = {{parse_poly("x1^3 - 2*x1*x2 + 0.5", 2), parse_poly("-x2^4 + x1", 2)},
                 {parse_poly("3*x1^2*x2^2 - 1", 2), parse_poly("x1 + x2", 2)}};
  const double rho = 1.7;
  const auto tau = crude_tau_bounds(loss, rho);
  Rng rng(9);
  for (int t = 0; t < 10000; ++t) {
    double p[2];
    double n2;
    do {
      p[0] = rng.uniform(-rho, rho);
      p[1] = rng.uniform(-rho, rho);
      n2 = p[0] * p[0] + p[1] * p[1];
    } while (n2 > rho * rho);
    for (std::size_t k = 0; k < loss.K(); ++k) {
      double lo = INFINITY;
      for (const auto& g : loss.pieces[k]) lo = std::min(lo, g.eval(p));
      CHECK(loss.piece_max(k, p) < tau.brackets[k].first);
      CHECK(lo > tau.brackets[k].second);
    }
  }
}

TEST_CASE("validate") {
  RevenueModel rm = preset_paper_revenue().revenue;
  DroModel good = revenue_dro_model(rm, gen_revenue_samples(rm.R, rm.N, 1));
  CHECK(validate(good).empty());

  DroModel outside = good;
  outside.samples.points[4] = {12.5};
  const auto v = validate(outside);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("sample 4") != std::string::npos);

  DroModel flat = good;
  flat.tau.brackets[1] = {3.0, 3.0};
  const auto f = validate(flat);
  REQUIRE(f.size() == 1);
  CHECK(f[0].find("tau bounds not strict") != std::string::npos);

  DroModel tight = good;
  tight.tau.brackets[0] = {-100.0, -200.0};
  CHECK(!validate(tight).empty());

  DroModel bad_radius = good;
  bad_radius.radius = 0.0;
  CHECK(!validate(bad_radius).empty());
}

TEST_CASE("interval archimedean certificate") {
  for (double R : {12.0, 1.0, 0.3}) {
    const auto c = interval_archimedean_certificate(R);
    CHECK(c.Rbar == doctest::Approx(R * R + 1.0));
    CHECK(c.residual().is_zero());
    const double mid[] = {R / 2.0};
    const double lhs = c.Rbar - mid[0] * mid[0];
    const double rhs = c.sigma0.eval(mid) + c.sigma1.eval(mid) * mid[0] + c.sigma2.eval(mid) * (R - mid[0]);
    CHECK(lhs == doctest::Approx(rhs));
  }
  CHECK(interval_archimedean_certificate(12.0).Rbar == 145.0);
  CHECK(interval_archimedean_certificate(1.0).Rbar == 2.0);
  CHECK_THROWS(interval_archimedean_certificate(0.0));
}

TEST_CASE("ball archimedean certificate") {
  const auto c = ball_archimedean_certificate(3, 1.0);
  CHECK(c.residual().is_zero());
  CHECK_THROWS(ball_archimedean_certificate(2, -1.0));
}

TEST_CASE("lifted pieces") {
  DroModel m = interval_model(parse_poly("x1^2", 1), {0.5});
  m.tau.brackets = {{5.0, -5.0}};
  const auto l = lifted_pieces(m, 0);
  REQUIRE(l.size() == 3);
  CHECK(l[0] == parse_poly("xt - x1^2", 1, true));
  CHECK(l[1] == parse_poly("5 - xt", 1, true));
  CHECK(l[2] == parse_poly("xt + 5", 1, true));
  CHECK_THROWS_AS(lifted_pieces(m, 1), std::out_of_range);

  DroModel c = interval_model(Poly::constant(1, -9.0), {0.5});
  CHECK(lifted_pieces(c, 0)[0] == parse_poly("xt + 9", 1, true));
}

TEST_CASE("lifted pieces are nonnegative at the piece maximum") {
  RevenueModel rm = preset_paper_revenue().revenue;
  DroModel model = revenue_dro_model(rm, gen_revenue_samples(rm.R, rm.N, 2));
  Rng rng(17);
  for (int t = 0; t < 500; ++t) {
    const double xi = rng.uniform(0.0, rm.R);
    for (std::size_t k = 0; k < model.loss.K(); ++k) {
      const double top = model.loss.piece_max(k, std::span<const double>(&xi, 1));
      const double pt[] = {xi, top};
      const auto l = lifted_pieces(model, k);
      for (std::size_t j = 0; j < model.loss.J(); ++j) CHECK(l[j].eval(pt) >= -1e-9);
      CHECK(l[model.loss.J()].eval(pt) > 0.0);
      CHECK(l[model.loss.J() + 1].eval(pt) > 0.0);
    }
  }
}

TEST_CASE("piecewise loss evaluates min over k of max over j") {
  PiecewiseLoss loss;
  loss.pieces = {{parse_poly("x1", 1), parse_poly("-x1", 1)}, {Poly::constant(1, 0.5), Poly::constant(1, 0.25)}};
  const double a[] = {0.2};
  const double b[] = {-0.9};
  CHECK(loss.eval(a) == doctest::Approx(0.2));
  CHECK(loss.eval(b) == doctest::Approx(0.5));
  CHECK(loss.max_degree() == 1);
}

TEST_CASE("convexity spot check") {
  DroModel convex = interval_model(parse_poly("x1^2", 1), {0.5});
  CHECK(convexity_spot_check(convex, 50, 1).empty());
  DroModel concave = interval_model(parse_poly("-x1^2", 1), {0.5});
  CHECK(convexity_spot_check(concave, 50, 1).size() == 1);
}
