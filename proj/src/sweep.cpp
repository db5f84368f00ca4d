#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "wassos/hierarchy.hpp"

namespace wassos {

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void BoundSweep::write_csv(std::ostream& out, const std::string& metadata) const {
  out << "# " << metadata << '\n';
  out << "kind,eps,r,rep,seed,status,bound,wall_ms,mean,q20,q80\n";
  for (const auto& row : rows) {
    out << row.kind << ',' << format_number(row.eps) << ',' << row.r << ',' << row.rep << ',' << row.seed
        << ',' << row.status << ',' << format_number(row.bound) << ',' << format_number(row.wall_ms)
        << ",,,\n";
  }
  for (const auto& a : aggregates) {
    out << a.kind << ',' << format_number(a.eps) << ',' << a.r << ",all,," << "aggregate,,,"
        << format_number(a.mean) << ',' << format_number(a.q20) << ',' << format_number(a.q80) << '\n';
  }
}

const SweepAggregate* BoundSweep::find(double eps, int r) const {
  for (const auto& a : aggregates) {
    if (a.r == r && std::abs(a.eps - eps) <= 1e-12 * std::max(1.0, std::abs(eps))) return &a;
  }
  return nullptr;
}

BoundSweep sweep(const SweepProblem& problem, const std::vector<int>& levels,
                 const std::vector<double>& radii, int replications, std::uint64_t base_seed,
                 const SolverOptions& options, int jobs) {
  if (replications < 1) throw std::invalid_argument("sweep: replications must be positive");
  BoundSweep out;
  for (double eps : radii) {
    for (int r : levels) {
      for (int rep = 0; rep < replications; ++rep) {
        SweepRow row;
        row.kind = problem.kind;
        row.eps = eps;
        row.r = r;
        row.rep = rep;
        row.seed = base_seed + static_cast<std::uint64_t>(rep);
        row.bound = std::numeric_limits<double>::quiet_NaN();
        out.rows.push_back(row);
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < out.rows.size(); t = next++) {
      SweepRow& row = out.rows[t];
      try {
        const Relaxation relax = problem.build(row.eps, row.r, row.seed);
        const RelaxationSolution sol = solve_relaxation(relax, options);
        row.status = to_string(sol.result.status);
        row.wall_ms = sol.wall_ms;
        if (sol.result.status == SolveStatus::Optimal) row.bound = problem.report(sol);
      } catch (const LevelTooSmall&) {
        row.status = "level-too-small";
      } catch (const std::exception&) {
        row.status = "error";
      }
    }
  };
  const int n = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t e = 0; e < radii.size(); ++e) {
    for (int r : levels) {
      SweepAggregate a;
      a.kind = problem.kind;
      a.eps = radii[e];
      a.r = r;
      std::vector<double> bounds;
      for (const auto& row : out.rows) {
        if (row.eps == a.eps && row.r == r && row.status == "optimal") bounds.push_back(row.bound);
      }
      a.count = bounds.size();
      a.mean = std::numeric_limits<double>::quiet_NaN();
      if (!bounds.empty()) {
        double s = 0.0;
        for (double b : bounds) s += b;
        a.mean = s / static_cast<double>(bounds.size());
      }
      a.q20 = quantile(bounds, 0.2);
      a.q80 = quantile(bounds, 0.8);
      out.aggregates.push_back(a);
    }
  }
  return out;
}

}  // namespace wassos
