#include "wassos/hierarchy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace wassos {

namespace {

Poly normalized(const Poly& p) {
  const double s = p.max_abs_coefficient();
  return s > 0.0 ? p * (1.0 / s) : p;
}

int ceil_half(int d) { return (d + 1) / 2; }

void require_level(int r, int min_level, const std::string& what) {
  if (r < min_level) {
    throw LevelTooSmall("relaxation level too small for " + what +
                            "; minimum admissible r = " + std::to_string(min_level),
                        min_level);
  }
}

void require_valid(const DroModel& model) {
  const auto violations = validate(model);
  if (violations.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& v : violations) msg += " " + v + ";";
  throw std::invalid_argument(msg);
}

void add_sos(Relaxation& relax, PolyExpr expr, int cap) {
  GramVar s = relax.problem.assert_is_sos(expr, cap);
  expr.add(s, Poly::constant(expr.nvars(), -1.0));
  relax.identities.push_back(std::move(expr));
}

/// Data shared by every hierarchy after the substitution xi = rho * u.
struct ScaledData {
  double rho = 1.0;
  std::vector<double> scale;
  std::vector<Poly> support;
  std::vector<Poly> distance;
};

ScaledData scaled_data(const SupportSet& support, const Samples& samples, double rho) {
  ScaledData d;
  d.rho = rho;
  d.scale.assign(support.dim, rho);
  for (const auto& h : support.inequalities) d.support.push_back(normalized(h.scale_variables(d.scale)));
  for (const auto& p : samples.points) {
    std::vector<double> c(p.size());
    for (std::size_t t = 0; t < p.size(); ++t) c[t] = p[t] / rho;
    d.distance.push_back(squared_distance(c));
  }
  return d;
}

void add_dual_variables(Relaxation& relax, std::size_t N) {
  relax.lambda = relax.problem.add_scalar(VarKind::Nonnegative, "lambda");
  for (std::size_t i = 0; i < N; ++i) {
    relax.alpha.push_back(relax.problem.add_scalar(VarKind::Free, "alpha" + std::to_string(i + 1)));
  }
}

std::vector<std::pair<ScalarVar, double>> dual_objective_terms(const Relaxation& relax, double eps,
                                                               double rho, double sign) {
  std::vector<std::pair<ScalarVar, double>> terms;
  const double N = static_cast<double>(relax.alpha.size());
  terms.emplace_back(relax.lambda, sign * (eps / rho) * (eps / rho));
  for (const auto& a : relax.alpha) terms.emplace_back(a, -sign / N);
  return terms;
}

int max_degree(const std::vector<Poly>& ps) {
  int d = 0;
  for (const auto& p : ps) d = std::max(d, p.total_degree());
  return d;
}

}  // namespace

int minimum_level(const DroModel& model, HierarchyKind kind) {
  const int dh = max_degree(model.support.inequalities);
  const int dg = model.loss.max_degree();
  switch (kind) {
    case HierarchyKind::AD:
      return ceil_half(std::max({2, std::max(1, dg), dh}));
    case HierarchyKind::ADTilde:
    case HierarchyKind::FD:
      return ceil_half(std::max({2, dg, dh}));
    case HierarchyKind::PD:
      break;
  }
  throw std::invalid_argument("minimum_level: PD needs a portfolio model");
}

int minimum_level(const PortfolioModel& pm) { return ceil_half(std::max(max_degree(pm.costs), 2)); }

Relaxation build_ad(const DroModel& model, int r) {
  require_valid(model);
  require_level(r, minimum_level(model, HierarchyKind::AD), "the lifted hierarchy");
  const std::size_t m = model.dim();
  const std::size_t n = m + 1;
  const int cap = 2 * r;
  const double rho = model.support.norm_bound;
  const ScaledData sd = scaled_data(model.support, model.samples, rho);

  Relaxation relax;
  relax.kind = HierarchyKind::AD;
  relax.level = r;
  relax.lambda_scale = rho * rho;
  add_dual_variables(relax, model.samples.size());
  relax.problem.set_objective(Sense::Maximize, dual_objective_terms(relax, model.radius, rho, -1.0));

  std::vector<Poly> support;
  for (const auto& h : sd.support) support.push_back(h.lift());
  std::vector<Poly> distance;
  for (const auto& phi : sd.distance) distance.push_back(phi.lift());

  for (std::size_t k = 0; k < model.loss.K(); ++k) {
    const auto [t1, t2] = model.tau.brackets[k];
    const double s = std::max({std::abs(t1), std::abs(t2), 1.0});
    std::vector<double> lifted_scale = sd.scale;
    lifted_scale.push_back(s);
    std::vector<Poly> pieces;
    for (const auto& g : lifted_pieces(model, k)) pieces.push_back(normalized(g.scale_variables(lifted_scale)));
    const Poly psi = Poly::variable(n, m) * s;

    for (std::size_t i = 0; i < model.samples.size(); ++i) {
      PolyExpr e(psi);
      e.add(relax.lambda, distance[i]);
      e.add(relax.alpha[i], Poly::constant(n, -1.0));
      for (const auto& h : support) {
        GramVar sigma = relax.problem.new_sos(n, multiplier_degree(cap, h.total_degree()));
        e.add(sigma, -h);
      }
      for (const auto& g : pieces) {
        GramVar eta = relax.problem.new_sos(n, multiplier_degree(cap, g.total_degree()));
        e.add(eta, -g);
      }
      add_sos(relax, std::move(e), cap);
    }
  }
  return relax;
}

Relaxation build_adtilde(const DroModel& model, int r) {
  require_valid(model);
  if (model.loss.J() != 1) throw std::invalid_argument("the min-polynomial hierarchy needs J = 1");
  require_level(r, minimum_level(model, HierarchyKind::ADTilde), "the min-polynomial hierarchy");
  const std::size_t m = model.dim();
  const int cap = 2 * r;
  const double rho = model.support.norm_bound;
  const ScaledData sd = scaled_data(model.support, model.samples, rho);

  Relaxation relax;
  relax.kind = HierarchyKind::ADTilde;
  relax.level = r;
  relax.lambda_scale = rho * rho;
  add_dual_variables(relax, model.samples.size());
  relax.problem.set_objective(Sense::Maximize, dual_objective_terms(relax, model.radius, rho, -1.0));

  for (std::size_t k = 0; k < model.loss.K(); ++k) {
    const Poly g = model.loss.pieces[k][0].scale_variables(sd.scale);
    for (std::size_t i = 0; i < model.samples.size(); ++i) {
      PolyExpr e(g);
      e.add(relax.lambda, sd.distance[i]);
      e.add(relax.alpha[i], Poly::constant(m, -1.0));
      for (const auto& h : sd.support) {
        GramVar sigma = relax.problem.new_sos(m, multiplier_degree(cap, h.total_degree()));
        e.add(sigma, -h);
      }
      add_sos(relax, std::move(e), cap);
    }
  }
  return relax;
}

Relaxation build_fd(const DroModel& model, int r) {
  require_valid(model);
  if (!model.convex) {
    throw std::invalid_argument("the convex hierarchy needs the model's convexity attestation");
  }
  require_level(r, minimum_level(model, HierarchyKind::FD), "the convex hierarchy");
  const std::size_t m = model.dim();
  const int cap = 2 * r;
  const double rho = model.support.norm_bound;
  const ScaledData sd = scaled_data(model.support, model.samples, rho);

  Relaxation relax;
  relax.kind = HierarchyKind::FD;
  relax.level = r;
  relax.lambda_scale = rho * rho;
  add_dual_variables(relax, model.samples.size());
  relax.problem.set_objective(Sense::Maximize, dual_objective_terms(relax, model.radius, rho, -1.0));

  for (std::size_t k = 0; k < model.loss.K(); ++k) {
    std::vector<Poly> pieces;
    for (const auto& g : model.loss.pieces[k]) pieces.push_back(g.scale_variables(sd.scale));
    for (std::size_t i = 0; i < model.samples.size(); ++i) {
      PolyExpr e(m);
      std::vector<std::pair<ScalarVar, double>> simplex;
      for (std::size_t j = 0; j < pieces.size(); ++j) {
        ScalarVar d = relax.problem.add_scalar(
            VarKind::Nonnegative,
            "delta" + std::to_string(k + 1) + "_" + std::to_string(j + 1) + "_" + std::to_string(i + 1));
        relax.delta.push_back(d);
        simplex.emplace_back(d, 1.0);
        e.add(d, pieces[j]);
      }
      relax.problem.add_linear_equality(simplex, 1.0);
      e.add(relax.lambda, sd.distance[i]);
      e.add(relax.alpha[i], Poly::constant(m, -1.0));
      for (const auto& h : sd.support) {
        GramVar sigma = relax.problem.new_sos(m, multiplier_degree(cap, h.total_degree()));
        e.add(sigma, -h);
      }
      add_sos(relax, std::move(e), cap);
    }
  }
  return relax;
}

Relaxation build_pd(const PortfolioModel& pm, int r) {
  const auto violations = validate(pm);
  if (!violations.empty()) throw std::invalid_argument("invalid portfolio model: " + violations.front());
  if (pm.samples.size() == 0) throw std::invalid_argument("portfolio model has no samples");
  require_level(r, minimum_level(pm), "the portfolio hierarchy");
  const std::size_t m = pm.m;
  const int cap = 2 * r;
  const double R = pm.R;

  SupportSet ball;
  ball.dim = m;
  ball.norm_bound = R;
  std::vector<double> origin(m, 0.0);
  ball.inequalities = {Poly::constant(m, R * R) - squared_distance(origin)};
  const ScaledData sd = scaled_data(ball, pm.samples, R);

  PortfolioModel scaled = pm;
  scaled.costs.clear();
  for (const auto& c : pm.costs) scaled.costs.push_back(c.scale_variables(sd.scale));

  Relaxation relax;
  relax.kind = HierarchyKind::PD;
  relax.level = r;
  relax.lambda_scale = R * R;
  std::vector<std::pair<ScalarVar, double>> simplex;
  for (std::size_t p = 0; p < m; ++p) {
    relax.weights.push_back(relax.problem.add_scalar(VarKind::Nonnegative, "y" + std::to_string(p + 1)));
    simplex.emplace_back(relax.weights.back(), 1.0);
  }
  relax.tau = relax.problem.add_scalar(VarKind::Free, "tau");
  add_dual_variables(relax, pm.samples.size());
  relax.problem.add_linear_equality(simplex, 1.0);
  relax.problem.set_objective(Sense::Minimize, dual_objective_terms(relax, pm.eps, R, 1.0));

  const auto pieces = portfolio_pieces(scaled, relax.weights, relax.tau);
  const Poly& h = sd.support.front();
  for (std::size_t i = 0; i < pm.samples.size(); ++i) {
    for (const auto& piece : pieces) {
      PolyExpr e(m);
      for (const auto& [v, mult] : piece.scalar_terms) e.add(v, -mult);
      e.add(relax.lambda, sd.distance[i]);
      e.add(relax.alpha[i], Poly::constant(m, -1.0));
      GramVar sigma = relax.problem.new_sos(m, multiplier_degree(cap, h.total_degree()));
      e.add(sigma, -h);
      add_sos(relax, std::move(e), cap);
    }
  }
  return relax;
}

Relaxation build(const DroModel& model, HierarchyKind kind, int r) {
  switch (kind) {
    case HierarchyKind::AD:
      return build_ad(model, r);
    case HierarchyKind::ADTilde:
      return build_adtilde(model, r);
    case HierarchyKind::FD:
      return build_fd(model, r);
    case HierarchyKind::PD:
      break;
  }
  throw std::invalid_argument("the portfolio hierarchy needs a portfolio model");
}

RelaxationSolution solve_relaxation(const Relaxation& relax, const SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RelaxationSolution sol;
  std::vector<std::size_t> index;
  const ConicStandardForm form = compile(relax.problem, &index);
  sol.result = solve(form, options);
  const std::vector<double> values = scalar_values(index, sol.result);
  sol.bound = sol.result.objective;
  sol.lambda = values.at(relax.lambda.id) / relax.lambda_scale;
  for (const auto& a : relax.alpha) sol.alpha.push_back(values.at(a.id));
  for (const auto& w : relax.weights) sol.weights.push_back(values.at(w.id));
  if (relax.kind == HierarchyKind::PD) sol.tau = values.at(relax.tau.id);
  for (const auto& e : relax.identities) {
    const Poly res = evaluate_expr(e, values, sol.result.blocks);
    sol.identity_residual = std::max(sol.identity_residual, res.max_abs_coefficient());
  }
  sol.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

Dimensions dimensions(const SdpProblem& problem) {
  Dimensions d;
  d.psd_blocks = problem.grams().size();
  d.scalar_variables = problem.scalars().size();
  d.equality_rows = problem.rows().size();
  for (const auto& g : problem.grams()) {
    d.gram_entries += g.size() * (g.size() + 1) / 2;
    d.largest_block = std::max(d.largest_block, g.size());
  }
  return d;
}

}  // namespace wassos
