#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wassos/poly.hpp"

namespace wassos {

/// Basic semi-algebraic set {xi : h_l(xi) >= 0} with a declared norm bound
/// ||xi|| <= norm_bound holding on the whole set.
struct SupportSet {
  std::size_t dim = 1;
  std::vector<Poly> inequalities;
  double norm_bound = 1.0;

  bool contains(std::span<const double> point, double tol) const;
};

/// Loss g(xi) = min_k max_j pieces[k][j](xi).
struct PiecewiseLoss {
  std::vector<std::vector<Poly>> pieces;

  std::size_t K() const { return pieces.size(); }
  std::size_t J() const { return pieces.empty() ? 0 : pieces.front().size(); }
  /// max_j pieces[k][j](point)
  double piece_max(std::size_t k, std::span<const double> point) const;
  double eval(std::span<const double> point) const;
  int max_degree() const;
};

struct Samples {
  std::vector<std::vector<double>> points;

  std::size_t size() const { return points.size(); }
};

/// One bracket (tau1, tau2) per piece index k with tau1 > tau2.
struct TauBounds {
  std::vector<std::pair<double, double>> brackets;
};

struct DroModel {
  SupportSet support;
  PiecewiseLoss loss;
  Samples samples;
  double radius = 1.0;
  TauBounds tau;
  /// User attestation that every piece and every -h_l is convex.
  bool convex = false;

  std::size_t dim() const { return support.dim; }
};

constexpr double kSampleMembershipTol = 1e-9;

/// Certified bracket from coefficient magnitudes on the ball of radius rho.
TauBounds crude_tau_bounds(const PiecewiseLoss& loss, double rho);

/// Empty iff the model satisfies all standing assumptions.
std::vector<std::string> validate(const DroModel& model);

/// Certificate Rbar - xi^2 = sigma0 + sigma1 * xi + sigma2 * (R - xi) for the
/// interval [0, R].
struct IntervalCertificate {
  double Rbar = 0.0;
  Poly sigma0;
  Poly sigma1;
  Poly sigma2;
  double R = 0.0;

  /// Left side minus right side; the zero polynomial for a valid certificate.
  Poly residual() const;
};

IntervalCertificate interval_archimedean_certificate(double R);

/// Certificate R^2 - ||xi||^2 = sigma0 + sigma1 * (R^2 - ||xi||^2) for the ball.
struct BallCertificate {
  double Rbar = 0.0;
  Poly sigma0;
  Poly sigma1;
  std::size_t dim = 1;
  double R = 0.0;

  Poly residual() const;
};

BallCertificate ball_archimedean_certificate(std::size_t dim, double R);

/// The J+2 polynomials in (xi, xt): xt - g_j for j = 1..J, tau1 - xt, xt - tau2.
std::vector<Poly> lifted_pieces(const DroModel& model, std::size_t k);

/// Samples random points in the support and returns one warning for each
/// piece or constraint whose Hessian is visibly not convex.
std::vector<std::string> convexity_spot_check(const DroModel& model, int points,
                                              std::uint64_t seed);

}  // namespace wassos
