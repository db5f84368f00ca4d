#include "wassos/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "wassos/apps.hpp"
#include "wassos/backend.hpp"
#include "wassos/hierarchy.hpp"
#include "wassos/model_io.hpp"
#include "wassos/oracle.hpp"
#include "wassos/svg.hpp"

namespace wassos {

namespace fs = std::filesystem;

namespace {

using nlohmann::json;

constexpr double kSandwichTol = 1e-5;
constexpr double kResidualTol = 1e-5;

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// A resolved experiment: how to draw a model instance and how to report it.
struct Problem {
  std::string app;  // "revenue", "portfolio" or "model"
  HierarchyKind kind = HierarchyKind::AD;
  std::vector<int> levels;
  std::vector<double> radii;
  int reps = 1;
  std::uint64_t seed = 1;
  bool negated = false;
  std::function<ModelDocument(double eps, std::uint64_t seed)> instance;
};

Relaxation build_document(const ModelDocument& doc, HierarchyKind kind, int r) {
  if (doc.portfolio) {
    if (kind != HierarchyKind::PD) throw ConfigError("portfolio models use --hierarchy pd");
    return build_pd(*doc.portfolio, r);
  }
  if (kind == HierarchyKind::PD) throw ConfigError("--hierarchy pd needs a portfolio model");
  return build(*doc.dro, kind, r);
}

int minimum_level(const ModelDocument& doc, HierarchyKind kind) {
  return doc.portfolio ? minimum_level(*doc.portfolio) : minimum_level(*doc.dro, kind);
}

Problem resolve(const RunConfig& c, bool sweep) {
  if (c.preset.empty() == c.model.empty()) throw ConfigError("give exactly one of --preset and --model");
  Problem p;
  double default_eps = 1.0;
  std::vector<int> default_levels;
  std::vector<double> default_radii;
  if (!c.preset.empty()) {
    const auto preset = find_preset(c.preset);
    if (!preset) throw ConfigError("unknown preset \"" + c.preset + "\"");
    p.app = preset->app;
    p.kind = preset->kind;
    p.reps = preset->replications;
    p.seed = preset->seed;
    default_levels = preset->levels;
    default_radii = preset->radii;
    if (p.app == "revenue") {
      const RevenueModel rm = preset->revenue;
      default_eps = rm.eps;
      p.negated = true;
      p.instance = [rm](double eps, std::uint64_t seed) {
        RevenueModel m = rm;
        m.eps = eps;
        ModelDocument doc;
        doc.dro = revenue_dro_model(m, gen_revenue_samples(m.R, m.N, seed));
        return doc;
      };
    } else {
      const PortfolioModel pm = preset->portfolio;
      default_eps = pm.eps;
      p.instance = [pm](double eps, std::uint64_t seed) {
        PortfolioModel m = pm;
        m.eps = eps;
        ModelDocument doc;
        doc.portfolio = portfolio_instance(m, seed);
        return doc;
      };
    }
  } else {
    const ModelDocument base = load_model(c.model);
    p.app = "model";
    p.kind = base.portfolio ? HierarchyKind::PD : HierarchyKind::AD;
    default_eps = base.portfolio ? base.portfolio->eps : base.dro->radius;
    p.instance = [base](double eps, std::uint64_t) {
      ModelDocument doc = base;
      if (doc.portfolio) doc.portfolio->eps = eps;
      if (doc.dro) doc.dro->radius = eps;
      return doc;
    };
  }
  if (c.hierarchy) {
    const auto kind = parse_hierarchy_kind(*c.hierarchy);
    if (!kind) throw ConfigError("unknown hierarchy \"" + *c.hierarchy + "\" (use ad, adtilde, fd or pd)");
    p.kind = *kind;
  }
  if (c.reps) {
    if (*c.reps < 1) throw ConfigError("--reps must be positive");
    p.reps = *c.reps;
  }
  if (c.seed) p.seed = *c.seed;

  if (c.r) {
    const int hi = c.r_max.value_or(*c.r);
    if (hi < *c.r) throw ConfigError("--r-max must be at least --r");
    for (int r = *c.r; r <= hi; ++r) p.levels.push_back(r);
  } else if (!default_levels.empty()) {
    p.levels = default_levels;
  } else {
    const ModelDocument doc = p.instance(default_eps, p.seed);
    p.levels = {minimum_level(doc, p.kind)};
  }
  if (c.eps_grid) {
    p.radii = parse_eps_grid(*c.eps_grid);
  } else if (c.eps) {
    p.radii = {*c.eps};
  } else if (sweep && !default_radii.empty()) {
    p.radii = default_radii;
  } else {
    p.radii = {default_eps};
  }
  for (double e : p.radii) {
    if (!(e > 0.0)) throw ConfigError("eps must be positive");
  }
  return p;
}

fs::path out_dir(const RunConfig& c) {
  const fs::path dir = c.out.empty() ? fs::path("wassos-out") : fs::path(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::string metadata(const std::string& command, const RunConfig& c, std::uint64_t seed) {
  return std::string("wassos version=") + kVersion + " command=" + command + " seed=" + std::to_string(seed) +
         " config=" + config_hash(c);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.tol = resolve_tol(c);
  return o;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const LevelTooSmall& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SdpaParseError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "preset") c.preset = v.get<std::string>();
      else if (key == "model") c.model = v.get<std::string>();
      else if (key == "hierarchy") c.hierarchy = v.get<std::string>();
      else if (key == "r") c.r = v.get<int>();
      else if (key == "r-max" || key == "r_max") c.r_max = v.get<int>();
      else if (key == "eps") c.eps = v.get<double>();
      else if (key == "eps-grid" || key == "eps_grid") c.eps_grid = v.get<std::string>();
      else if (key == "reps") c.reps = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "tol") c.tol = v.get<double>();
      else if (key == "jobs") c.jobs = v.get<int>();
      else if (key == "export-only" || key == "export_only") c.export_only = v.get<bool>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "grid") c.grid = v.get<int>();
      else if (key == "svg") c.svg = v.get<bool>();
      else throw ConfigError("unknown config key \"" + key + "\"");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig merge_config(const RunConfig& base, const RunConfig& flags) {
  RunConfig c = base;
  if (!flags.preset.empty()) {
    c.preset = flags.preset;
    c.model.clear();
  }
  if (!flags.model.empty()) {
    c.model = flags.model;
    c.preset.clear();
  }
  if (flags.hierarchy) c.hierarchy = flags.hierarchy;
  if (flags.r) c.r = flags.r;
  if (flags.r_max) c.r_max = flags.r_max;
  if (flags.eps) {
    c.eps = flags.eps;
    c.eps_grid.reset();
  }
  if (flags.eps_grid) c.eps_grid = flags.eps_grid;
  if (flags.reps) c.reps = flags.reps;
  if (flags.seed) c.seed = flags.seed;
  if (flags.tol) c.tol = flags.tol;
  if (flags.jobs != 1) c.jobs = flags.jobs;
  if (flags.export_only) c.export_only = true;
  if (!flags.out.empty()) c.out = flags.out;
  if (flags.grid) c.grid = flags.grid;
  if (flags.svg) c.svg = true;
  return c;
}

std::string config_hash(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "preset=" << c.preset << ";model=" << c.model << ";hierarchy=" << c.hierarchy.value_or("")
     << ";r=" << (c.r ? std::to_string(*c.r) : "") << ";r_max=" << (c.r_max ? std::to_string(*c.r_max) : "")
     << ";eps=";
  if (c.eps) os << *c.eps;
  os << ";eps_grid=" << c.eps_grid.value_or("") << ";reps=" << (c.reps ? std::to_string(*c.reps) : "")
     << ";seed=" << (c.seed ? std::to_string(*c.seed) : "") << ";tol=" << resolve_tol(c)
     << ";export_only=" << c.export_only << ";grid=" << (c.grid ? std::to_string(*c.grid) : "");
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double resolve_tol(const RunConfig& c) {
  if (c.tol) {
    if (!(*c.tol > 0.0)) throw ConfigError("--tol must be positive");
    return *c.tol;
  }
  if (const char* env = std::getenv("WASSOS_SOLVER_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) throw ConfigError("WASSOS_SOLVER_TOL must be a positive number");
    return v;
  }
  return SolverOptions{}.tol;
}

std::vector<double> parse_eps_grid(const std::string& text) {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &tail) != 3 || n < 1 || !(lo > 0.0) || hi < lo) {
    throw ConfigError("--eps-grid expects lo:hi:n with 0 < lo <= hi and n >= 1");
  }
  return log_grid(lo, hi, static_cast<std::size_t>(n));
}

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Problem p = resolve(c, false);
    const int r = p.levels.front();
    const double eps = p.radii.front();
    const ModelDocument doc = p.instance(eps, p.seed);
    const Relaxation relax = build_document(doc, p.kind, r);
    const fs::path dir = out_dir(c);
    const std::string stem = to_string(p.kind) + "_r" + std::to_string(r);

    if (c.export_only) {
      const fs::path file = dir / (stem + ".dat-s");
      export_sdpa_file(compile(relax.problem), file);
      out << file.string() << '\n';
      return static_cast<int>(kExitOk);
    }

    const RelaxationSolution sol = solve_relaxation(relax, solver_options(c));
    const Dimensions dims = dimensions(relax.problem);
    const double bound = p.negated ? -sol.bound : sol.bound;
    std::ostringstream csv;
    csv << "# " << metadata("solve", c, p.seed) << '\n';
    csv << "kind,r,eps,status,bound,lambda,iterations,identity_residual,wall_ms,psd_blocks,scalar_variables,"
           "gram_entries,equality_rows,largest_block\n";
    csv << to_string(p.kind) << ',' << r << ',' << fmt(eps) << ',' << to_string(sol.result.status) << ','
        << fmt(bound) << ',' << fmt(sol.lambda) << ',' << sol.result.iterations << ','
        << fmt(sol.identity_residual) << ',' << fmt(sol.wall_ms) << ',' << dims.psd_blocks << ','
        << dims.scalar_variables << ',' << dims.gram_entries << ',' << dims.equality_rows << ','
        << dims.largest_block << '\n';
    out << csv.str();
    write_text(dir / "solve.csv", csv.str());

    SolutionArtifact art;
    art.kind = to_string(p.kind);
    art.r = r;
    art.eps = eps;
    art.status = to_string(sol.result.status);
    art.bound = sol.bound;
    art.lambda = sol.lambda;
    art.alpha = sol.alpha;
    art.weights = sol.weights;
    art.tau = sol.tau;
    art.identity_residual = sol.identity_residual;
    art.negated = p.negated;
    art.model = doc;
    write_solution(dir / "solution.json", art);

    if (sol.result.status != SolveStatus::Optimal) {
      err << "solver: " << to_string(sol.result.status);
      if (!sol.result.message.empty()) err << " (" << sol.result.message << ")";
      err << '\n';
      return static_cast<int>(kExitSolver);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (c.jobs < 1) throw ConfigError("--jobs must be positive");
    const Problem p = resolve(c, true);
    SweepProblem sp;
    sp.kind = to_string(p.kind);
    sp.build = [&p](double eps, int r, std::uint64_t seed) {
      return build_document(p.instance(eps, seed), p.kind, r);
    };
    const bool negated = p.negated;
    sp.report = [negated](const RelaxationSolution& s) { return negated ? -s.bound : s.bound; };
    const BoundSweep result = sweep(sp, p.levels, p.radii, p.reps, p.seed, solver_options(c), c.jobs);
    std::ostringstream csv;
    result.write_csv(csv, metadata("sweep", c, p.seed));
    out << csv.str();
    const fs::path dir = out_dir(c);
    write_text(dir / "sweep.csv", csv.str());
    if (c.svg) {
      const std::string title = (c.preset.empty() ? std::string("model") : c.preset) + " (" + sp.kind + ")";
      write_text(dir / "sweep.svg", band_chart_svg(result, title, p.negated ? "revenue bound" : "bound"));
    }
    for (const auto& row : result.rows) {
      if (row.status != "optimal") return static_cast<int>(kExitSolver);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_scale(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (c.preset.empty()) throw ConfigError("scale needs --preset scal-revenue or scal-portfolio");
    const auto preset = find_preset(c.preset);
    if (!preset) throw ConfigError("unknown preset \"" + c.preset + "\"");
    if (preset->scale_grid.empty()) throw ConfigError("preset \"" + c.preset + "\" has no scalability grid");
    const std::uint64_t seed = c.seed.value_or(preset->seed);
    const int r = c.r.value_or(preset->levels.front());
    const double eps = c.eps.value_or(preset->radii.front());
    const SolverOptions opt = solver_options(c);
    std::ostringstream csv;
    csv << "# " << metadata("scale", c, seed) << '\n';
    csv << "size,N,r,psd_blocks,scalar_variables,gram_entries,equality_rows,largest_block,status,bound,wall_ms\n";
    int code = kExitOk;
    for (const auto& [size, N] : preset->scale_grid) {
      ModelDocument doc;
      bool negated = false;
      if (preset->app == "revenue") {
        RevenueModel rm = preset->revenue;
        rm.customers = gen_customers(size, rm.R, seed);
        rm.N = N;
        rm.eps = eps;
        doc.dro = revenue_dro_model(rm, gen_revenue_samples(rm.R, N, seed));
        negated = true;
      } else {
        PortfolioModel pm = preset->portfolio;
        pm.m = size;
        pm.costs = portfolio_costs(size);
        pm.N = N;
        pm.eps = eps;
        doc.portfolio = portfolio_instance(pm, seed);
      }
      const Relaxation relax = build_document(doc, preset->kind, r);
      const Dimensions d = dimensions(relax.problem);
      csv << size << ',' << N << ',' << r << ',' << d.psd_blocks << ',' << d.scalar_variables << ','
          << d.gram_entries << ',' << d.equality_rows << ',' << d.largest_block << ',';
      if (c.export_only) {
        csv << "not-solved,,\n";
      } else {
        const RelaxationSolution sol = solve_relaxation(relax, opt);
        if (sol.result.status != SolveStatus::Optimal) code = kExitSolver;
        csv << to_string(sol.result.status) << ',' << fmt(negated ? -sol.bound : sol.bound) << ','
            << fmt(sol.wall_ms) << '\n';
      }
      out << csv.str();
      csv.str("");
    }
    return code;
  });
}

int cmd_oracle(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const fs::path dir = c.out.empty() ? fs::path("wassos-out") : fs::path(c.out);
    const fs::path file = dir / "solution.json";
    if (!fs::exists(file)) throw ConfigError("no solve artifacts at " + file.string() + "; run solve first");
    const SolutionArtifact s = read_solution(file);
    if (s.status != "optimal") throw ConfigError("latest solve did not end optimal (" + s.status + ")");

    std::ostringstream csv;
    csv << "# " << metadata("oracle", c, 0) << '\n';
    csv << "invariant,value,reference,slack,pass\n";
    auto row = [&](const std::string& name, double value, double reference, double slack) {
      csv << name << ',' << fmt(value) << ',' << fmt(reference) << ',' << fmt(slack) << ','
          << (slack >= 0.0 ? "pass" : "fail") << '\n';
    };

    if (s.model.dro) {
      const DroModel& m = *s.model.dro;
      if (m.dim() > kMaxGridDim) throw ConfigError("oracle checks need dimension <= 4");
      static constexpr int kLpGrid[] = {0, 200, 40, 12, 6};
      static constexpr int kDenseGrid[] = {0, 4001, 201, 41, 17};
      const auto lp_n = static_cast<std::size_t>(c.grid.value_or(kLpGrid[m.dim()]));
      const Grid lp_grid = make_grid(m.support, lp_n);
      const Grid dense = make_grid(m.support, kDenseGrid[m.dim()]);
      SolverOptions lp_opt;
      lp_opt.tol = 1e-9;
      const double grid_value = grid_primal_bound(m, lp_grid, lp_opt);
      const double emp = empirical_value(m.loss, m.samples);
      row("sandwich", s.bound, grid_value, grid_value + kSandwichTol - s.bound);
      row("empirical", s.bound, emp, emp + kSandwichTol - s.bound);
      const double res = semiinfinite_residual(s.lambda, s.alpha, m, dense);
      row("semiinfinite", res, -kResidualTol, res + kResidualTol);
    } else {
      const PortfolioModel& pm = *s.model.portfolio;
      if (pm.m > kMaxGridDim) throw ConfigError("oracle checks need dimension <= 4");
      static constexpr int kDenseGrid[] = {0, 4001, 201, 41, 17};
      SupportSet ball;
      ball.dim = pm.m;
      ball.norm_bound = pm.R;
      std::vector<double> origin(pm.m, 0.0);
      ball.inequalities = {Poly::constant(pm.m, pm.R * pm.R) - squared_distance(origin)};
      const Grid dense = make_grid(ball, kDenseGrid[pm.m]);
      auto neg_loss = [&](std::span<const double> xi) { return -portfolio_loss(pm, s.weights, s.tau, xi); };
      const double res = semiinfinite_residual(s.lambda, s.alpha, neg_loss, pm.samples, dense);
      row("semiinfinite", res, -kResidualTol, res + kResidualTol);
      std::vector<double> losses;
      double mean = 0.0;
      for (const auto& xi : pm.samples.points) {
        double v = 0.0;
        for (std::size_t p = 0; p < pm.m; ++p) v += s.weights[p] * pm.costs[p].eval(xi);
        losses.push_back(v);
        mean += v / static_cast<double>(pm.samples.size());
      }
      const double emp = mean + pm.gamma * cvar_empirical(losses, pm.eta);
      row("empirical-cvar", s.bound, emp, s.bound - emp + kSandwichTol);
    }
    out << csv.str();
    write_text(dir / "oracle.csv", csv.str());
    return static_cast<int>(kExitOk);
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wasserstein DRO bounds through sum-of-squares hierarchies"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;
  std::string hierarchy;
  std::string eps_grid;
  int r = 0;
  int r_max = 0;
  int reps = 0;
  int grid = 0;
  double eps = 0.0;
  double tol = 0.0;
  std::uint64_t seed = 0;

  std::vector<CLI::App*> subs;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "JSON config; flags override its keys");
    s->add_option("--preset", flags.preset, "paper-revenue, paper-portfolio, scal-revenue or scal-portfolio");
    s->add_option("--model", flags.model, "JSON model file");
    s->add_option("--hierarchy", hierarchy, "ad, adtilde, fd or pd");
    s->add_option("--r", r, "relaxation level");
    s->add_option("--r-max", r_max, "largest level for sweeps");
    s->add_option("--eps", eps, "Wasserstein radius");
    s->add_option("--eps-grid", eps_grid, "lo:hi:n log-spaced radii");
    s->add_option("--reps", reps, "replications");
    s->add_option("--seed", seed, "base seed");
    s->add_option("--tol", tol, "solver tolerance (default WASSOS_SOLVER_TOL or 1e-7)");
    s->add_option("--jobs", flags.jobs, "parallel solves");
    s->add_flag("--export-only", flags.export_only, "write SDPA files instead of solving");
    s->add_option("--out", flags.out, "output directory (default wassos-out)");
    s->add_option("--grid", grid, "oracle LP grid points per axis");
    s->add_flag("--svg", flags.svg, "also write an SVG band chart");
    subs.push_back(s);
    return s;
  };
  CLI::App* solve_cmd = add("solve", "build and solve one relaxation");
  CLI::App* sweep_cmd = add("sweep", "solve over radii, levels and replications");
  CLI::App* oracle_cmd = add("oracle", "check the latest solve against brute-force oracles");
  CLI::App* scale_cmd = add("scale", "dimension counts over a scalability grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  CLI::App* used = nullptr;
  for (auto* s : subs) {
    if (s->parsed()) used = s;
  }
  if (used->count("--hierarchy")) flags.hierarchy = hierarchy;
  if (used->count("--r")) flags.r = r;
  if (used->count("--r-max")) flags.r_max = r_max;
  if (used->count("--eps")) flags.eps = eps;
  if (used->count("--eps-grid")) flags.eps_grid = eps_grid;
  if (used->count("--reps")) flags.reps = reps;
  if (used->count("--seed")) flags.seed = seed;
  if (used->count("--tol")) flags.tol = tol;
  if (used->count("--grid")) flags.grid = grid;

  RunConfig config = flags;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      err << "i/o error: cannot open " << config_path << '\n';
      return kExitIo;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
      config = merge_config(parse_config_json(ss.str()), flags);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return kExitUsage;
    }
  }

  if (used == solve_cmd) return cmd_solve(config, out, err);
  if (used == sweep_cmd) return cmd_sweep(config, out, err);
  if (used == oracle_cmd) return cmd_oracle(config, out, err);
  if (used == scale_cmd) return cmd_scale(config, out, err);
  return kExitUsage;
}

}  // namespace wassos
