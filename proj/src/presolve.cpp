#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "wassos/backend.hpp"

namespace wassos {

namespace {

// (is_linear, block or linear index, i, j) with i <= j for PSD entries.
using Key = std::tuple<bool, std::size_t, std::size_t, std::size_t>;
using SparseRow = std::map<Key, double>;

// Entries that cancel to below this fraction of their inputs are dropped.
constexpr double kCancellationTol = 1e-13;

Key psd_key(const GramCoef& g) { return {false, g.block, std::min(g.i, g.j), std::max(g.i, g.j)}; }
Key linear_key(std::size_t k) { return {true, k, 0, 0}; }

SparseRow to_sparse(const ConicRow& row) {
  SparseRow out;
  for (const auto& g : row.psd) out[psd_key(g)] += g.coef;
  for (const auto& [k, c] : row.linear) out[linear_key(k)] += c;
  return out;
}

// Linear indices are renumbered through `new_index` when given.
ConicRow to_row(const SparseRow& row, const std::vector<std::ptrdiff_t>* new_index = nullptr) {
  ConicRow out;
  for (const auto& [key, v] : row) {
    if (v == 0.0) continue;
    const auto& [lin, a, i, j] = key;
    if (lin) {
      out.linear.emplace_back(new_index ? static_cast<std::size_t>((*new_index)[a]) : a, v);
    } else {
      out.psd.push_back({a, i, j, v});
    }
  }
  return out;
}

}  // namespace

FreeColumnPresolve presolve_free_columns(const ConicStandardForm& form, std::size_t max_rows) {
  FreeColumnPresolve pre;
  pre.original_rows = form.rows.size();
  pre.original_linear = form.num_linear();
  pre.sense_sign = form.sense == Sense::Minimize ? 1.0 : -1.0;

  std::vector<SparseRow> rows;
  rows.reserve(form.rows.size());
  for (const auto& r : form.rows) rows.push_back(to_sparse(r));
  std::vector<double> rhs = form.rhs;
  SparseRow objective = to_sparse(form.objective);
  double offset = form.objective_offset;

  const std::size_t first_free = form.num_nonneg;
  std::vector<std::set<std::size_t>> rows_of(form.num_free);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [key, v] : rows[r]) {
      const auto& [lin, a, i, j] = key;
      if (lin && a >= first_free) rows_of[a - first_free].insert(r);
    }
  }

  std::vector<bool> row_dead(rows.size(), false);
  std::vector<bool> column_gone(form.num_linear(), false);
  for (std::size_t f = 0; f < form.num_free; ++f) {
    const std::size_t k = first_free + f;
    const auto& touching = rows_of[f];
    if (touching.empty() || touching.size() > max_rows) continue;
    const Key kk = linear_key(k);
    std::size_t p = *touching.begin();
    for (std::size_t r : touching) {
      if (std::abs(rows[r].at(kk)) > std::abs(rows[p].at(kk))) p = r;
    }
    FreeColumnPresolve::Elimination step;
    step.column = k;
    step.row = p;
    step.pivot = rows[p].at(kk);
    step.rhs = rhs[p];
    const auto obj_it = objective.find(kk);
    step.cost = obj_it == objective.end() ? 0.0 : obj_it->second;
    step.pivot_row = to_row(rows[p]);

    const std::vector<std::size_t> others(touching.begin(), touching.end());
    for (std::size_t r : others) {
      if (r == p) continue;
      const double ark = rows[r].at(kk);
      step.other_rows.emplace_back(r, ark);
      const double m = ark / step.pivot;
      for (const auto& [key, v] : rows[p]) {
        if (key == kk) continue;
        double& target = rows[r][key];
        const double before = target;
        target -= m * v;
        const auto& [lin, a, i, j] = key;
        const bool free_col = lin && a >= first_free;
        if (std::abs(target) <= kCancellationTol * std::max(std::abs(before), std::abs(m * v))) {
          rows[r].erase(key);
          if (free_col) rows_of[a - first_free].erase(r);
        } else if (free_col) {
          rows_of[a - first_free].insert(r);
        }
      }
      rhs[r] -= m * rhs[p];
      rows[r].erase(kk);
    }
    if (step.cost != 0.0) {
      const double m = step.cost / step.pivot;
      for (const auto& [key, v] : rows[p]) {
        if (key != kk) objective[key] -= m * v;
      }
      objective.erase(kk);
      offset += m * rhs[p];
    }
    for (const auto& [key, v] : rows[p]) {
      const auto& [lin, a, i, j] = key;
      if (lin && a >= first_free) rows_of[a - first_free].erase(p);
    }
    row_dead[p] = true;
    column_gone[k] = true;
    pre.steps.push_back(std::move(step));
  }

  std::vector<std::ptrdiff_t> new_index(form.num_linear(), -1);
  std::size_t next = 0;
  for (std::size_t k = 0; k < form.num_linear(); ++k) {
    if (column_gone[k]) continue;
    new_index[k] = static_cast<std::ptrdiff_t>(next++);
    pre.kept_columns.push_back(k);
  }

  ConicStandardForm& g = pre.reduced;
  g.block_sizes = form.block_sizes;
  g.num_nonneg = form.num_nonneg;
  g.num_free = form.num_free - pre.steps.size();
  g.sense = form.sense;
  g.free_handling = form.free_handling;
  g.objective_offset = offset;
  g.objective = to_row(objective, &new_index);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (row_dead[r]) continue;
    g.rows.push_back(to_row(rows[r], &new_index));
    g.rhs.push_back(rhs[r]);
    pre.kept_rows.push_back(r);
  }
  return pre;
}

SolveResult FreeColumnPresolve::postsolve(const SolveResult& reduced_result,
                                          const ConicStandardForm& original) const {
  SolveResult out = reduced_result;
  out.linear.assign(original_linear, 0.0);
  for (std::size_t t = 0; t < kept_columns.size() && t < reduced_result.linear.size(); ++t) {
    out.linear[kept_columns[t]] = reduced_result.linear[t];
  }
  out.dual.assign(original_rows, 0.0);
  for (std::size_t t = 0; t < kept_rows.size() && t < reduced_result.dual.size(); ++t) {
    out.dual[kept_rows[t]] = reduced_result.dual[t];
  }
  const auto value = [&](const GramCoef& gc) { return out.blocks[gc.block](gc.i, gc.j); };
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    double acc = it->rhs;
    for (const auto& gc : it->pivot_row.psd) acc -= gc.coef * value(gc);
    for (const auto& [k, c] : it->pivot_row.linear) {
      if (k != it->column) acc -= c * out.linear[k];
    }
    out.linear[it->column] = acc / it->pivot;
    double y = sense_sign * it->cost;
    for (const auto& [r, a] : it->other_rows) y -= a * out.dual[r];
    out.dual[it->row] = y / it->pivot;
  }

  double maxres = 0.0;
  for (std::size_t k = 0; k < original.rows.size(); ++k) {
    double v = 0.0;
    for (const auto& gc : original.rows[k].psd) v += gc.coef * value(gc);
    for (const auto& [idx, c] : original.rows[k].linear) v += c * out.linear[idx];
    maxres = std::max(maxres, std::abs(v - original.rhs[k]));
  }
  out.max_equality_residual = maxres;
  return out;
}

}  // namespace wassos
