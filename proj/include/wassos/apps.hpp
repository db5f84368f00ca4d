#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wassos/model.hpp"
#include "wassos/soscomp.hpp"

namespace wassos {

/// Third-order utility customer: offered price a(xi - b)^3 + d below the
/// knot b and d above it.
struct Customer {
  double a = 1.0;
  double b = 0.0;
  double d = 0.0;
};

struct RevenueModel {
  std::vector<Customer> customers;
  double R = 12.0;
  std::size_t N = 30;
  double eps = 1.0;
};

struct PortfolioModel {
  std::size_t m = 3;
  std::vector<Poly> costs;
  double gamma = 10.0;
  double eta = 0.2;
  double R = 1.0;
  std::size_t N = 30;
  double eps = 1.0;
  Samples samples;
};

/// Loss grid g1 = -a(xi-b)^3 - d, g2 = -d per customer on [0, R].
struct RevenueLoss {
  PiecewiseLoss loss;
  SupportSet support;
};

std::vector<std::string> validate(const RevenueModel& rm);
std::vector<std::string> validate(const PortfolioModel& pm);

RevenueLoss revenue_loss(const RevenueModel& rm);
/// max_k f_k(xi), the best offer at valuation xi.
double revenue_value(const RevenueModel& rm, double xi);
/// Full DRO instance with samples and crude tau bounds.
DroModel revenue_dro_model(const RevenueModel& rm, const Samples& samples);

/// Coefficients of the two CVaR pieces: piece k equals
/// scale[k] * sum_p y_p c_p + tau_coef[k] * tau.
struct PortfolioPieceCoefficients {
  std::array<double, 2> scale{};
  std::array<double, 2> tau_coef{};
};

PortfolioPieceCoefficients portfolio_piece_coefficients(double gamma, double eta);

/// The two pieces as expressions in xi, affine in the scalar variables y, tau.
std::array<PolyExpr, 2> portfolio_pieces(const PortfolioModel& pm, const std::vector<ScalarVar>& y,
                                         ScalarVar tau);

/// max_k piece_k((y, tau), xi) evaluated directly.
double portfolio_loss(const PortfolioModel& pm, const std::vector<double>& y, double tau,
                      std::span<const double> xi);

/// Cost polynomials c_1..c_m; c_p = -xi_p^3 beyond the first three.
std::vector<Poly> portfolio_costs(std::size_t m);

Samples gen_revenue_samples(double R, std::size_t N, std::uint64_t seed);
Samples gen_sphere_samples(std::size_t m, std::size_t N, std::uint64_t seed);
/// The three customers of the revenue experiment followed by random ones
/// with a in (0, 4], b in [0, R], d in [0, 14] and -a b^3 + d >= 0.
std::vector<Customer> gen_customers(std::size_t K, double R, std::uint64_t seed);

/// Portfolio instance with freshly drawn samples.
PortfolioModel portfolio_instance(const PortfolioModel& params, std::uint64_t seed);

enum class HierarchyKind { AD, ADTilde, FD, PD };

std::string to_string(HierarchyKind kind);
std::optional<HierarchyKind> parse_hierarchy_kind(const std::string& text);

/// An experiment: a model family plus the sweep grid.
struct ExperimentPreset {
  std::string name;
  std::string app;  // "revenue" or "portfolio"
  HierarchyKind kind = HierarchyKind::AD;
  std::vector<int> levels;
  std::vector<double> radii;
  int replications = 10;
  std::uint64_t seed = 1;
  RevenueModel revenue;
  PortfolioModel portfolio;
  /// Scalability grid: (K or m, N) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> scale_grid;
};

std::vector<double> log_grid(double lo, double hi, std::size_t n);

ExperimentPreset preset_paper_revenue();
ExperimentPreset preset_paper_portfolio();
ExperimentPreset preset_scal_revenue();
ExperimentPreset preset_scal_portfolio();
std::optional<ExperimentPreset> find_preset(const std::string& name);

}  // namespace wassos
