#include <algorithm>
#include <map>
#include <tuple>

#include "wassos/backend.hpp"

namespace wassos {

namespace {

void canonicalize_row(ConicRow& row) {
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> psd;
  for (const auto& g : row.psd) {
    const auto [i, j] = std::minmax(g.i, g.j);
    psd[{g.block, i, j}] += g.coef;
  }
  row.psd.clear();
  for (const auto& [key, c] : psd) {
    if (c != 0.0) row.psd.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), c});
  }
  std::map<std::size_t, double> lin;
  for (const auto& [k, c] : row.linear) lin[k] += c;
  row.linear.clear();
  for (const auto& [k, c] : lin) {
    if (c != 0.0) row.linear.emplace_back(k, c);
  }
}

}  // namespace

bool ConicRow::operator==(const ConicRow& other) const {
  if (psd.size() != other.psd.size() || linear != other.linear) return false;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    const auto& a = psd[k];
    const auto& b = other.psd[k];
    if (a.block != b.block || a.i != b.i || a.j != b.j || a.coef != b.coef) return false;
  }
  return true;
}

void ConicStandardForm::canonicalize() {
  for (auto& r : rows) canonicalize_row(r);
  canonicalize_row(objective);
}

bool ConicStandardForm::operator==(const ConicStandardForm& other) const {
  return block_sizes == other.block_sizes && num_nonneg == other.num_nonneg &&
         num_free == other.num_free && rows == other.rows && rhs == other.rhs &&
         objective == other.objective && objective_offset == other.objective_offset &&
         sense == other.sense;
}

ConicStandardForm compile(const SdpProblem& problem, std::vector<std::size_t>* scalar_index) {
  ConicStandardForm form;
  form.sense = problem.sense();
  for (const auto& g : problem.grams()) form.block_sizes.push_back(g.size());

  const auto& scalars = problem.scalars();
  std::vector<std::size_t> index(scalars.size());
  for (std::size_t s = 0; s < scalars.size(); ++s) {
    if (scalars[s].kind == VarKind::Nonnegative) index[s] = form.num_nonneg++;
  }
  for (std::size_t s = 0; s < scalars.size(); ++s) {
    if (scalars[s].kind == VarKind::Free) index[s] = form.num_nonneg + form.num_free++;
  }

  for (const auto& row : problem.rows()) {
    ConicRow cr;
    cr.psd = row.grams;
    for (const auto& [id, c] : row.scalars) cr.linear.emplace_back(index[id], c);
    form.rows.push_back(std::move(cr));
    form.rhs.push_back(row.constant == 0.0 ? 0.0 : -row.constant);
  }
  for (const auto& [id, c] : problem.objective()) form.objective.linear.emplace_back(index[id], c);
  form.canonicalize();
  if (scalar_index) *scalar_index = std::move(index);
  return form;
}

std::vector<double> scalar_values(const std::vector<std::size_t>& scalar_index,
                                  const SolveResult& result) {
  std::vector<double> out(scalar_index.size(), 0.0);
  for (std::size_t s = 0; s < scalar_index.size(); ++s) {
    if (scalar_index[s] < result.linear.size()) out[s] = result.linear[scalar_index[s]];
  }
  return out;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::NumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

}  // namespace wassos
