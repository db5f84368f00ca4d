#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wassos/poly.hpp"

namespace wassos {

/// Thrown when a constraint needs a higher relaxation level than requested.
class LevelTooSmall : public std::invalid_argument {
 public:
  LevelTooSmall(const std::string& what, int min_level)
      : std::invalid_argument(what), min_level_(min_level) {}
  int min_level() const { return min_level_; }

 private:
  int min_level_;
};

enum class VarKind { Free, Nonnegative };
enum class Sense { Maximize, Minimize };

struct ScalarVar {
  std::size_t id = 0;
};

struct GramVar {
  std::size_t id = 0;
  std::size_t nvars = 1;
  std::vector<Exponent> basis;

  std::size_t size() const { return basis.size(); }
};

/// constant + sum scalar * multiplier + sum factor * b^T G b
struct PolyExpr {
  explicit PolyExpr(std::size_t nvars) : constant(nvars) {}
  explicit PolyExpr(Poly c) : constant(std::move(c)) {}

  Poly constant;
  std::vector<std::pair<ScalarVar, Poly>> scalar_terms;
  std::vector<std::pair<GramVar, Poly>> gram_terms;

  std::size_t nvars() const { return constant.nvars(); }
  PolyExpr& add(const Poly& p);
  PolyExpr& add(ScalarVar v, const Poly& multiplier);
  PolyExpr& add(const GramVar& g, const Poly& factor);
};

/// Coefficient on the upper-triangular Gram entry (i <= j) of a block.
struct GramCoef {
  std::size_t block = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  double coef = 0.0;
};

/// sum scalar coefs + sum gram coefs + constant == 0
struct EqualityRow {
  std::vector<std::pair<std::size_t, double>> scalars;
  std::vector<GramCoef> grams;
  double constant = 0.0;
};

struct ScalarInfo {
  VarKind kind = VarKind::Free;
  std::string name;
};

/// Linear objective over scalar variables and equality constraints over
/// scalars and symmetric PSD Gram blocks. Only the upper triangle of each
/// Gram block is an unknown; an off-diagonal entry G_ij (i < j) stands for
/// both G_ij and G_ji, so coefficient matching adds 2 * f for it.
class SdpProblem {
 public:
  ScalarVar add_scalar(VarKind kind, std::string name = {});
  GramVar new_sos(std::size_t nvars, int max_total_degree);

  void set_objective(Sense sense, std::vector<std::pair<ScalarVar, double>> terms);
  void add_linear_equality(std::vector<std::pair<ScalarVar, double>> terms, double rhs);

  /// Appends one row per monomial of degree <= degree_cap.
  void assert_zero(const PolyExpr& expr, int degree_cap);
  /// Adds a residual Gram block S and asserts expr - b^T S b == 0.
  GramVar assert_is_sos(const PolyExpr& expr, int degree_cap);

  const std::vector<ScalarInfo>& scalars() const { return scalars_; }
  const std::vector<GramVar>& grams() const { return grams_; }
  const std::vector<EqualityRow>& rows() const { return rows_; }
  const std::vector<std::pair<std::size_t, double>>& objective() const { return objective_; }
  Sense sense() const { return sense_; }

 private:
  std::vector<ScalarInfo> scalars_;
  std::vector<GramVar> grams_;
  std::vector<EqualityRow> rows_;
  std::vector<std::pair<std::size_t, double>> objective_;
  Sense sense_ = Sense::Minimize;
};

/// Largest even multiplier degree d with d + factor_degree <= total_cap.
int multiplier_degree(int total_cap, int factor_degree);

/// b^T G b for a symmetric value G of the given Gram variable.
Poly gram_polynomial(const GramVar& g, const Eigen::MatrixXd& value);

/// Substitutes solved values into an expression.
Poly evaluate_expr(const PolyExpr& expr, const std::vector<double>& scalar_values,
                   const std::vector<Eigen::MatrixXd>& gram_values);

}  // namespace wassos
