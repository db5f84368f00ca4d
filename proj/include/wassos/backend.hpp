#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "wassos/soscomp.hpp"

namespace wassos {

/// One linear functional over the conic variables. PSD entries use the
/// upper-triangle convention of SdpProblem: the functional is
/// sum coef * X_ij over i <= j with X symmetric, so an off-diagonal coef
/// corresponds to the symmetric matrix entry coef / 2 in trace form.
struct ConicRow {
  std::vector<GramCoef> psd;
  /// Index into the linear variables: [0, num_nonneg) are nonnegative,
  /// [num_nonneg, num_nonneg + num_free) are free.
  std::vector<std::pair<std::size_t, double>> linear;

  bool operator==(const ConicRow& other) const;
};

/// optimize objective . x + offset  s.t.  rows[k] . x == rhs[k],
/// x in PSD blocks x R^num_nonneg_+ x R^num_free.
struct ConicStandardForm {
  std::vector<std::size_t> block_sizes;
  std::size_t num_nonneg = 0;
  std::size_t num_free = 0;
  std::vector<ConicRow> rows;
  std::vector<double> rhs;
  ConicRow objective;
  double objective_offset = 0.0;
  Sense sense = Sense::Minimize;
  /// How free variables are represented; the embedded solver keeps them
  /// native, the SDPA export splits them.
  std::string free_handling = "native";

  std::size_t num_linear() const { return num_nonneg + num_free; }
  /// Sorts and merges entries so that structurally equal forms compare equal.
  void canonicalize();
  bool operator==(const ConicStandardForm& other) const;
};

/// Translates an SdpProblem. Gram blocks keep their order; nonnegative
/// scalars come first among the linear variables, then free ones, each in
/// declaration order. If `scalar_index` is given it receives the linear
/// index of every scalar variable.
ConicStandardForm compile(const SdpProblem& problem,
                          std::vector<std::size_t>* scalar_index = nullptr);

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(SolveStatus status);

struct SolverOptions {
  double tol = 1e-7;
  /// When the iteration breaks down, its best iterate is still reported as
  /// optimal if relp, reld and gap are all within this bound.
  double reduced_tol = 1e-5;
  int max_iterations = 200;
  /// Largest coupled set of equality rows the dense Schur factorization accepts.
  std::size_t max_component_rows = 2000;
  std::size_t max_block_size = 120;
  /// Substitute out free variables that touch few rows before solving.
  bool presolve = true;
  /// Run the iteration in long double; slower but reaches tighter gaps on
  /// degenerate relaxations.
  bool extended_precision = true;
  bool verbose = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  /// Primal objective (including offset); NaN unless optimal.
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<double> linear;
  std::vector<double> dual;
  double max_equality_residual = 0.0;
  double min_eigenvalue = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  /// Optimal only within SolverOptions::reduced_tol.
  bool reduced_accuracy = false;
  std::string message;
};

/// Primal-dual path-following interior point method (HKM direction with
/// Mehrotra predictor-corrector). Deterministic for identical inputs.
SolveResult solve(const ConicStandardForm& form, const SolverOptions& options = {});

/// Free variables that appear in at most a few rows, substituted out by
/// pivoting on their largest coefficient. postsolve() maps a solution of
/// `reduced` back to the original form, recovering the eliminated primal
/// values and the duals of the dropped rows.
struct FreeColumnPresolve {
  struct Elimination {
    std::size_t column = 0;
    std::size_t row = 0;
    double pivot = 0.0;
    double cost = 0.0;
    double rhs = 0.0;
    ConicRow pivot_row;
    std::vector<std::pair<std::size_t, double>> other_rows;
  };
  ConicStandardForm reduced;
  std::vector<Elimination> steps;
  std::vector<std::size_t> kept_rows;
  std::vector<std::size_t> kept_columns;
  std::size_t original_rows = 0;
  std::size_t original_linear = 0;
  double sense_sign = 1.0;

  SolveResult postsolve(const SolveResult& reduced_result, const ConicStandardForm& original) const;
};

FreeColumnPresolve presolve_free_columns(const ConicStandardForm& form, std::size_t max_rows = 8);

/// Solved values of the SdpProblem's scalar variables.
std::vector<double> scalar_values(const std::vector<std::size_t>& scalar_index,
                                  const SolveResult& result);

class SdpaParseError : public std::runtime_error {
 public:
  SdpaParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SDPA sparse format in its dual orientation: the form's rows become the
/// constraint matrices F_k, rhs becomes the SDPA cost vector, and the
/// objective becomes F_0 (negated for minimization). Nonnegative variables
/// and the two halves of each split free variable share one trailing LP
/// block. A leading comment records sense, free count and offset.
void export_sdpa(const ConicStandardForm& form, std::ostream& out);
std::string export_sdpa_string(const ConicStandardForm& form);
void export_sdpa_file(const ConicStandardForm& form, const std::filesystem::path& path);

ConicStandardForm parse_sdpa(std::istream& in);
ConicStandardForm parse_sdpa_string(const std::string& text);
ConicStandardForm parse_sdpa_file(const std::filesystem::path& path);

}  // namespace wassos
