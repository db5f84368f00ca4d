#include "wassos/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "wassos/rng.hpp"

namespace wassos {

bool SupportSet::contains(std::span<const double> point, double tol) const {
  double norm2 = 0.0;
  for (double v : point) norm2 += v * v;
  if (std::sqrt(norm2) > norm_bound + tol) return false;
  for (const auto& h : inequalities) {
    if (h.eval(point) < -tol) return false;
  }
  return true;
}

double PiecewiseLoss::piece_max(std::size_t k, std::span<const double> point) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& g : pieces.at(k)) best = std::max(best, g.eval(point));
  return best;
}

double PiecewiseLoss::eval(std::span<const double> point) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pieces.size(); ++k) best = std::min(best, piece_max(k, point));
  return best;
}

int PiecewiseLoss::max_degree() const {
  int d = 0;
  for (const auto& row : pieces) {
    for (const auto& g : row) d = std::max(d, g.total_degree());
  }
  return d;
}

TauBounds crude_tau_bounds(const PiecewiseLoss& loss, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("crude_tau_bounds: rho must be positive");
  TauBounds tau;
  for (const auto& row : loss.pieces) {
    double bound = 0.0;
    for (const auto& g : row) {
      double b = 0.0;
      for (const auto& [e, c] : g.terms()) b += std::abs(c) * std::pow(rho, e.degree());
      bound = std::max(bound, b);
    }
    tau.brackets.emplace_back(bound + 1.0, -bound - 1.0);
  }
  return tau;
}

std::vector<std::string> validate(const DroModel& model) {
  std::vector<std::string> out;
  const std::size_t m = model.support.dim;
  if (m == 0) out.push_back("support dimension must be positive");
  if (model.support.inequalities.empty()) out.push_back("support needs at least one inequality");
  for (std::size_t l = 0; l < model.support.inequalities.size(); ++l) {
    if (model.support.inequalities[l].nvars() != m) {
      out.push_back("inequality " + std::to_string(l) + " has wrong dimension");
    }
  }
  if (!(model.support.norm_bound > 0.0)) out.push_back("norm bound must be positive");

  const auto& loss = model.loss;
  if (loss.K() == 0 || loss.J() == 0) out.push_back("loss grid is empty");
  for (std::size_t k = 0; k < loss.K(); ++k) {
    if (loss.pieces[k].size() != loss.J()) {
      out.push_back("loss row " + std::to_string(k) + " is not fully populated");
      continue;
    }
    for (const auto& g : loss.pieces[k]) {
      if (g.nvars() != m) out.push_back("piece in row " + std::to_string(k) + " has wrong dimension");
    }
  }

  if (model.samples.size() == 0) out.push_back("need at least one sample");
  bool samples_ok = true;
  for (std::size_t i = 0; i < model.samples.size(); ++i) {
    const auto& p = model.samples.points[i];
    if (p.size() != m) {
      out.push_back("sample " + std::to_string(i) + " has wrong dimension");
      samples_ok = false;
    } else if (!model.support.contains(p, kSampleMembershipTol)) {
      out.push_back("sample " + std::to_string(i) + " lies outside the support");
    }
  }
  if (!(model.radius > 0.0)) out.push_back("radius must be positive");

  if (model.tau.brackets.size() != loss.K()) {
    out.push_back("tau bounds count does not match K");
    return out;
  }
  if (!out.empty() && !samples_ok) return out;
  for (std::size_t k = 0; k < loss.K(); ++k) {
    const auto [t1, t2] = model.tau.brackets[k];
    if (!(t1 > t2)) {
      out.push_back("tau bounds not strict for piece " + std::to_string(k));
      continue;
    }
    if (loss.pieces[k].size() != loss.J()) continue;
    for (std::size_t i = 0; i < model.samples.size(); ++i) {
      const auto& p = model.samples.points[i];
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      for (const auto& g : loss.pieces[k]) {
        if (g.nvars() != p.size()) continue;
        const double v = g.eval(p);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
      if (!(hi < t1 && lo > t2)) {
        out.push_back("tau bounds for piece " + std::to_string(k) + " do not bracket sample " +
                      std::to_string(i));
        break;
      }
    }
  }
  return out;
}

Poly IntervalCertificate::residual() const {
  Poly xi = Poly::variable(1, 0);
  Poly lhs = Poly::constant(1, Rbar) - xi * xi;
  Poly rhs = sigma0 + sigma1 * xi + sigma2 * (Poly::constant(1, R) - xi);
  return lhs - rhs;
}

IntervalCertificate interval_archimedean_certificate(double R) {
  if (!(R > 0.0)) throw std::invalid_argument("interval certificate needs R > 0");
  IntervalCertificate c;
  c.R = R;
  c.Rbar = R * R + 1.0;
  Poly xi = Poly::variable(1, 0);
  Poly r_minus = Poly::constant(1, R) - xi;
  c.sigma0 = Poly::constant(1, c.Rbar - R * R);
  c.sigma1 = (r_minus * r_minus) * (1.0 / R);
  c.sigma2 = (xi * xi) * (1.0 / R) + Poly::constant(1, R);
  return c;
}

Poly BallCertificate::residual() const {
  std::vector<double> zero(dim, 0.0);
  Poly h = Poly::constant(dim, R * R) - squared_distance(zero);
  Poly lhs = Poly::constant(dim, Rbar) - squared_distance(zero);
  return lhs - (sigma0 + sigma1 * h);
}

BallCertificate ball_archimedean_certificate(std::size_t dim, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("ball certificate needs R > 0");
  BallCertificate c;
  c.dim = dim;
  c.R = R;
  c.Rbar = R * R;
  c.sigma0 = Poly(dim);
  c.sigma1 = Poly::constant(dim, 1.0);
  return c;
}

std::vector<Poly> lifted_pieces(const DroModel& model, std::size_t k) {
  if (k >= model.loss.K()) throw std::out_of_range("lifted_pieces: invalid piece index");
  if (k >= model.tau.brackets.size()) throw std::out_of_range("lifted_pieces: missing tau bounds");
  const std::size_t m = model.dim();
  const Poly xt = Poly::variable(m + 1, m);
  std::vector<Poly> out;
  for (const auto& g : model.loss.pieces[k]) out.push_back(xt - g.lift());
  const auto [t1, t2] = model.tau.brackets[k];
  out.push_back(Poly::constant(m + 1, t1) - xt);
  out.push_back(xt - Poly::constant(m + 1, t2));
  return out;
}

namespace {

Eigen::MatrixXd hessian_at(const Poly& p, std::span<const double> point) {
  const std::size_t m = p.nvars();
  Eigen::MatrixXd H(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    Poly da = p.derivative(a);
    for (std::size_t b = a; b < m; ++b) {
      H(a, b) = H(b, a) = da.derivative(b).eval(point);
    }
  }
  return H;
}

bool hessian_psd(const Poly& p, std::span<const double> point) {
  Eigen::MatrixXd H = hessian_at(p, point);
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-8 * scale;
}

}  // namespace

std::vector<std::string> convexity_spot_check(const DroModel& model, int points,
                                              std::uint64_t seed) {
  const std::size_t m = model.dim();
  const double rho = model.support.norm_bound;
  Rng rng(seed);
  std::vector<std::vector<double>> pts;
  for (int attempt = 0; attempt < 100 * points && static_cast<int>(pts.size()) < points; ++attempt) {
    std::vector<double> p(m);
    for (auto& v : p) v = rng.uniform(-rho, rho);
    if (model.support.contains(p, 0.0)) pts.push_back(std::move(p));
  }
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < model.loss.K(); ++k) {
    for (std::size_t j = 0; j < model.loss.pieces[k].size(); ++j) {
      const Poly& g = model.loss.pieces[k][j];
      for (const auto& p : pts) {
        if (!hessian_psd(g, p)) {
          warnings.push_back("piece (" + std::to_string(k) + "," + std::to_string(j) +
                             ") is not convex near a sampled point");
          break;
        }
      }
    }
  }
  for (std::size_t l = 0; l < model.support.inequalities.size(); ++l) {
    const Poly neg = -model.support.inequalities[l];
    for (const auto& p : pts) {
      if (!hessian_psd(neg, p)) {
        warnings.push_back("constraint " + std::to_string(l) + " is not concave near a sampled point");
        break;
      }
    }
  }
  return warnings;
}

}  // namespace wassos
