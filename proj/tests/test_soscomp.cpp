#include <doctest.h>

#include <cmath>

#include "wassos/backend.hpp"
#include "wassos/rng.hpp"
#include "wassos/soscomp.hpp"

using namespace wassos;

namespace {

double max_abs_coefficient(const Poly& p) {
  double m = 0.0;
  for (const auto& [e, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

TEST_CASE("new_sos block sizes") {
  SdpProblem p;
  CHECK(p.new_sos(2, 4).size() == 6);
  CHECK(p.new_sos(2, 2).size() == 3);
  CHECK(p.new_sos(1, 0).size() == 1);
  CHECK(p.grams().size() == 3);
  CHECK_THROWS(p.new_sos(1, -2));
}

TEST_CASE("multiplier degree") {
  CHECK(multiplier_degree(4, 3) == 0);
  CHECK(multiplier_degree(4, 2) == 2);
  CHECK(multiplier_degree(4, 1) == 2);
  CHECK(multiplier_degree(6, 0) == 6);
  CHECK_THROWS_AS(multiplier_degree(2, 3), LevelTooSmall);
}

TEST_CASE("assert_zero row counts") {
  SdpProblem p;
  const GramVar g = p.new_sos(2, 2);
  PolyExpr e(2);
  e.add(g, Poly::constant(2, 1.0));
  p.assert_zero(e, 4);
  CHECK(p.rows().size() == 15);
  CHECK_THROWS(p.assert_zero(PolyExpr(parse_poly("x1^5", 2)), 4));
}

TEST_CASE("assert_zero matches coefficients with doubled off-diagonals") {
  SdpProblem p;
  const GramVar g = p.new_sos(1, 2);
  PolyExpr e(parse_poly("1 + x1^2", 1));
  e.add(g, Poly::constant(1, -1.0));
  p.assert_zero(e, 2);
  REQUIRE(p.rows().size() == 3);
  // constant row: 1 - G11 = 0
  const auto& r0 = p.rows()[0];
  CHECK(r0.constant == 1.0);
  REQUIRE(r0.grams.size() == 1);
  CHECK(r0.grams[0].i == 0);
  CHECK(r0.grams[0].j == 0);
  CHECK(r0.grams[0].coef == -1.0);
  // x1 row: -2 G12 = 0
  const auto& r1 = p.rows()[1];
  REQUIRE(r1.grams.size() == 1);
  CHECK(r1.grams[0].i == 0);
  CHECK(r1.grams[0].j == 1);
  CHECK(r1.grams[0].coef == -2.0);
  CHECK(r1.constant == 0.0);
}

TEST_CASE("compile keeps block and row structure") {
  SdpProblem p;
  p.assert_is_sos(PolyExpr(parse_poly("1 + x1^2", 1)), 2);
  const auto f = compile(p);
  CHECK(f.block_sizes == std::vector<std::size_t>{2});
  CHECK(f.rows.size() == 3);
  CHECK(f.num_linear() == 0);
}

TEST_CASE("compiling twice is deterministic") {
  const auto make = [] {
    SdpProblem p;
    const auto lam = p.add_scalar(VarKind::Nonnegative, "lambda");
    const auto a = p.add_scalar(VarKind::Free, "alpha");
    PolyExpr e(parse_poly("x1^4 - 3*x1*x2 + x2^2 + 2", 2));
    e.add(lam, parse_poly("x1^2 + x2^2", 2));
    e.add(a, Poly::constant(2, -1.0));
    p.assert_is_sos(e, 4);
    p.set_objective(Sense::Maximize, {{a, 1.0}, {lam, -0.25}});
    return compile(p);
  };
  const auto f1 = make();
  const auto f2 = make();
  CHECK(f1 == f2);
  CHECK(export_sdpa_string(f1) == export_sdpa_string(f2));
}

TEST_CASE("assert_is_sos feasibility examples") {
  {
    SdpProblem p;
    const GramVar s = p.assert_is_sos(PolyExpr(Poly::constant(1, 2.0)), 0);
    CHECK(s.size() == 1);
    const auto r = solve(compile(p));
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.blocks[0](0, 0) == doctest::Approx(2.0).epsilon(1e-7));
  }
  {
    SdpProblem p;
    p.assert_is_sos(PolyExpr(Poly::constant(1, -1.0)), 0);
    CHECK(solve(compile(p)).status == SolveStatus::Infeasible);
  }
  {
    SdpProblem p;
    p.assert_is_sos(PolyExpr(parse_poly("x1", 1)), 2);
    CHECK(solve(compile(p)).status == SolveStatus::Infeasible);
  }
  {
    SdpProblem p;
    p.assert_is_sos(PolyExpr(parse_poly("(x1 - x2)^2", 2)), 2);
    const auto r = solve(compile(p));
    CHECK(r.status == SolveStatus::Optimal);
    CHECK(r.max_equality_residual <= 1e-7);
  }
}

TEST_CASE("random SOS round trip and reconstruction") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + t % 2;
    const int r = 1 + t % 3;
    Poly sum(n);
    for (int q = 0; q < 2; ++q) {
      Poly f(n);
      for (const auto& e : monomial_basis(n, r)) f.add_term(e, rng.uniform(-1.0, 1.0));
      sum = sum + f * f;
    }
    SdpProblem p;
    const PolyExpr expr(sum);
    const GramVar s = p.assert_is_sos(expr, 2 * r);
    std::vector<std::size_t> index;
    const auto res = solve(compile(p, &index));
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.max_equality_residual <= 1e-7);
    CHECK(max_abs_coefficient(sum - gram_polynomial(s, res.blocks[0])) <= 1e-6);
    PolyExpr identity = expr;
    identity.add(s, Poly::constant(n, -1.0));
    CHECK(max_abs_coefficient(evaluate_expr(identity, scalar_values(index, res), res.blocks)) <= 1e-6);
  }
}

TEST_CASE("scalar terms enter the identity") {
  SdpProblem p;
  const auto t = p.add_scalar(VarKind::Free, "t");
  PolyExpr e(parse_poly("1 + x1^2", 1));
  e.add(t, parse_poly("2*x1", 1));
  p.assert_is_sos(e, 2);
  p.set_objective(Sense::Maximize, {{t, 1.0}});
  std::vector<std::size_t> index;
  const auto r = solve(compile(p, &index));
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(scalar_values(index, r)[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-6));
}
