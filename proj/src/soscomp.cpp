#include "wassos/soscomp.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace wassos {

PolyExpr& PolyExpr::add(const Poly& p) {
  constant += p;
  return *this;
}

PolyExpr& PolyExpr::add(ScalarVar v, const Poly& multiplier) {
  if (multiplier.nvars() != nvars()) throw DimensionError("scalar multiplier dimension mismatch");
  scalar_terms.emplace_back(v, multiplier);
  return *this;
}

PolyExpr& PolyExpr::add(const GramVar& g, const Poly& factor) {
  if (factor.nvars() != nvars() || g.nvars != nvars()) {
    throw DimensionError("gram term dimension mismatch");
  }
  gram_terms.emplace_back(g, factor);
  return *this;
}

ScalarVar SdpProblem::add_scalar(VarKind kind, std::string name) {
  scalars_.push_back({kind, std::move(name)});
  return ScalarVar{scalars_.size() - 1};
}

GramVar SdpProblem::new_sos(std::size_t nvars, int max_total_degree) {
  if (max_total_degree < 0) throw std::invalid_argument("new_sos: negative degree");
  GramVar g;
  g.id = grams_.size();
  g.nvars = nvars;
  g.basis = monomial_basis(nvars, max_total_degree / 2);
  grams_.push_back(g);
  return g;
}

void SdpProblem::set_objective(Sense sense, std::vector<std::pair<ScalarVar, double>> terms) {
  sense_ = sense;
  objective_.clear();
  for (const auto& [v, c] : terms) {
    if (v.id >= scalars_.size()) throw std::out_of_range("objective references unknown scalar");
    objective_.emplace_back(v.id, c);
  }
}

void SdpProblem::add_linear_equality(std::vector<std::pair<ScalarVar, double>> terms, double rhs) {
  EqualityRow row;
  std::map<std::size_t, double> acc;
  for (const auto& [v, c] : terms) {
    if (v.id >= scalars_.size()) throw std::out_of_range("equality references unknown scalar");
    acc[v.id] += c;
  }
  for (const auto& [id, c] : acc) {
    if (c != 0.0) row.scalars.emplace_back(id, c);
  }
  row.constant = -rhs;
  rows_.push_back(std::move(row));
}

namespace {

[[noreturn]] void overflow(int degree, int cap) {
  const int need = (degree + 1) / 2;
  throw LevelTooSmall("relaxation level too small: a term of degree " + std::to_string(degree) +
                          " exceeds 2r = " + std::to_string(cap) +
                          "; minimum admissible r = " + std::to_string(need),
                      need);
}

struct RowAccumulator {
  std::map<std::size_t, double> scalars;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> grams;
  double constant = 0.0;
};

}  // namespace

void SdpProblem::assert_zero(const PolyExpr& expr, int degree_cap) {
  if (degree_cap < 0) throw std::invalid_argument("assert_zero: negative degree cap");
  const std::size_t n = expr.nvars();
  const auto basis = monomial_basis(n, degree_cap);
  std::map<Exponent, std::size_t, GrlexLess> index;
  for (std::size_t r = 0; r < basis.size(); ++r) index.emplace(basis[r], r);
  std::vector<RowAccumulator> acc(basis.size());

  auto row_of = [&](const Exponent& e) -> RowAccumulator& {
    if (e.degree() > degree_cap) overflow(e.degree(), degree_cap);
    return acc[index.at(e)];
  };

  if (expr.constant.nvars() != n) throw DimensionError("expression dimension mismatch");
  for (const auto& [e, c] : expr.constant.terms()) row_of(e).constant += c;
  for (const auto& [v, mult] : expr.scalar_terms) {
    if (v.id >= scalars_.size()) throw std::out_of_range("expression references unknown scalar");
    for (const auto& [e, c] : mult.terms()) row_of(e).scalars[v.id] += c;
  }
  for (const auto& [g, factor] : expr.gram_terms) {
    if (g.id >= grams_.size()) throw std::out_of_range("expression references unknown gram block");
    const auto& b = g.basis;
    const int top = factor.total_degree() + 2 * (b.empty() ? 0 : b.back().degree());
    if (!factor.is_zero() && top > degree_cap) overflow(top, degree_cap);
    for (std::size_t a = 0; a < b.size(); ++a) {
      for (std::size_t c = a; c < b.size(); ++c) {
        const Exponent pair = b[a] + b[c];
        const double mult = a == c ? 1.0 : 2.0;
        for (const auto& [e, f] : factor.terms()) {
          row_of(e + pair).grams[{g.id, a, c}] += mult * f;
        }
      }
    }
  }

  for (auto& a : acc) {
    EqualityRow row;
    row.constant = a.constant;
    for (const auto& [id, c] : a.scalars) {
      if (c != 0.0) row.scalars.emplace_back(id, c);
    }
    for (const auto& [key, c] : a.grams) {
      if (c != 0.0) row.grams.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), c});
    }
    rows_.push_back(std::move(row));
  }
}

GramVar SdpProblem::assert_is_sos(const PolyExpr& expr, int degree_cap) {
  GramVar s = new_sos(expr.nvars(), degree_cap);
  PolyExpr full = expr;
  full.add(s, Poly::constant(expr.nvars(), -1.0));
  assert_zero(full, degree_cap);
  return s;
}

int multiplier_degree(int total_cap, int factor_degree) {
  if (total_cap < factor_degree) {
    const int need = (factor_degree + 1) / 2;
    throw LevelTooSmall("relaxation level too small for a constraint of degree " +
                            std::to_string(factor_degree) + "; minimum admissible r = " +
                            std::to_string(need),
                        need);
  }
  return 2 * ((total_cap - factor_degree) / 2);
}

Poly gram_polynomial(const GramVar& g, const Eigen::MatrixXd& value) {
  Poly out(g.nvars);
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t c = a; c < g.size(); ++c) {
      const double v = a == c ? value(a, a) : value(a, c) + value(c, a);
      out.add_term(g.basis[a] + g.basis[c], v);
    }
  }
  return out;
}

Poly evaluate_expr(const PolyExpr& expr, const std::vector<double>& scalar_values,
                   const std::vector<Eigen::MatrixXd>& gram_values) {
  Poly out = expr.constant;
  for (const auto& [v, mult] : expr.scalar_terms) out += mult * scalar_values.at(v.id);
  for (const auto& [g, factor] : expr.gram_terms) {
    out += factor * gram_polynomial(g, gram_values.at(g.id));
  }
  return out;
}

}  // namespace wassos
