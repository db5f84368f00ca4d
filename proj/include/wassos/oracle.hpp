#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "wassos/backend.hpp"
#include "wassos/model.hpp"

namespace wassos {

/// Finite surrogate for the support: an axis-uniform lattice filtered by
/// the defining inequalities.
struct Grid {
  std::vector<std::vector<double>> points;
  std::size_t per_axis = 0;
  /// Lattice bounding box and spacing per axis.
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> spacing;
};

constexpr std::size_t kMaxGridDim = 4;
constexpr double kGridMembershipTol = 1e-12;

/// Lattice over [-rho, rho]^m, with an axis tightened wherever the support
/// has an affine inequality in that coordinate alone, then filtered.
Grid make_grid(const SupportSet& support, std::size_t per_axis);

/// (1/N) sum_i g(xi_i).
double empirical_value(const PiecewiseLoss& loss, const Samples& samples);

/// Worst-case expectation restricted to measures supported on the grid.
/// This upper-bounds the min-form problem. Throws std::runtime_error when
/// the LP does not solve to optimality.
double grid_primal_bound(const DroModel& model, const Grid& grid, const SolverOptions& options = {1e-9});

using PointFunction = std::function<double(std::span<const double>)>;

/// min over i and grid points of g(xi) + lambda ||xi - xi_i||^2 - alpha_i.
double semiinfinite_residual(double lambda, const std::vector<double>& alpha, const PointFunction& g,
                             const Samples& samples, const Grid& grid);
double semiinfinite_residual(double lambda, const std::vector<double>& alpha, const DroModel& model,
                             const Grid& grid);

/// Empirical CVaR at level eta: mean of the worst eta-fraction of losses.
double cvar_empirical(std::vector<double> losses, double eta);

}  // namespace wassos
