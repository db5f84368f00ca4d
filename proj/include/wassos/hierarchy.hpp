#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wassos/apps.hpp"
#include "wassos/backend.hpp"
#include "wassos/model.hpp"
#include "wassos/soscomp.hpp"

namespace wassos {

/// A compiled relaxation together with handles to its named variables.
///
/// Builders substitute xi = rho * u so that the support lies in the unit
/// ball, and (for the lifted hierarchy) xt = s_k * v so that the lifted
/// variable lies in [-1, 1]; constraint polynomials are divided by their
/// largest coefficient. These substitutions leave the optimal value
/// unchanged. The stored lambda variable is lambda * rho^2.
struct Relaxation {
  HierarchyKind kind = HierarchyKind::AD;
  int level = 0;
  SdpProblem problem;
  ScalarVar lambda;
  std::vector<ScalarVar> alpha;
  std::vector<ScalarVar> delta;
  std::vector<ScalarVar> weights;
  ScalarVar tau;
  double lambda_scale = 1.0;
  /// Each asserted identity (including its residual Gram term), used to
  /// measure reconstruction error after a solve.
  std::vector<PolyExpr> identities;
};

/// Smallest r accepted by the builder for this model.
int minimum_level(const DroModel& model, HierarchyKind kind);
int minimum_level(const PortfolioModel& pm);

Relaxation build_ad(const DroModel& model, int r);
Relaxation build_adtilde(const DroModel& model, int r);
Relaxation build_fd(const DroModel& model, int r);
Relaxation build_pd(const PortfolioModel& pm, int r);
Relaxation build(const DroModel& model, HierarchyKind kind, int r);

struct RelaxationSolution {
  SolveResult result;
  /// Optimal value of the relaxation in model units; NaN unless optimal.
  double bound = 0.0;
  double lambda = 0.0;
  std::vector<double> alpha;
  std::vector<double> weights;
  double tau = 0.0;
  /// Largest coefficient of any reconstructed identity.
  double identity_residual = 0.0;
  double wall_ms = 0.0;
};

RelaxationSolution solve_relaxation(const Relaxation& relax, const SolverOptions& options = {});

/// Size of a relaxation as the artifact counts it.
struct Dimensions {
  std::size_t psd_blocks = 0;
  std::size_t scalar_variables = 0;
  std::size_t gram_entries = 0;
  std::size_t equality_rows = 0;
  std::size_t largest_block = 0;
};

Dimensions dimensions(const SdpProblem& problem);

struct SweepRow {
  std::string kind;
  double eps = 0.0;
  int r = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string status;
  double bound = 0.0;
  double wall_ms = 0.0;
};

struct SweepAggregate {
  std::string kind;
  double eps = 0.0;
  int r = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double q20 = 0.0;
  double q80 = 0.0;
};

struct BoundSweep {
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;

  /// One metadata comment line, a header, raw rows, then aggregate rows.
  void write_csv(std::ostream& out, const std::string& metadata) const;
  const SweepAggregate* find(double eps, int r) const;
};

/// Produces the relaxation for one (eps, r, replication seed) and maps its
/// solution to the reported bound.
struct SweepProblem {
  std::string kind;
  std::function<Relaxation(double eps, int r, std::uint64_t seed)> build;
  std::function<double(const RelaxationSolution&)> report;
};

/// Linear-interpolation quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Runs every (eps, r, rep) cell, `jobs` at a time. Failures are recorded in
/// the status column and never abort the sweep.
BoundSweep sweep(const SweepProblem& problem, const std::vector<int>& levels,
                 const std::vector<double>& radii, int replications, std::uint64_t base_seed,
                 const SolverOptions& options, int jobs = 1);

}  // namespace wassos
