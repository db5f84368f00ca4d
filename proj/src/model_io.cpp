#include "wassos/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "wassos/backend.hpp"

namespace wassos {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

Poly poly_field(const json& j, std::size_t nvars, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a polynomial string");
  try {
    return parse_poly(j.get<std::string>(), nvars);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Samples samples_field(const json& j, const std::filesystem::path& base_dir, std::size_t dim) {
  Samples s;
  if (j.is_string()) {
    std::filesystem::path p = j.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    s = read_samples_csv(p);
  } else {
    try {
      s.points = j.get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad samples: ") + e.what());
    }
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.points[i].size() != dim) {
      throw ConfigError("sample " + std::to_string(i) + " has " + std::to_string(s.points[i].size()) +
                        " coordinates, expected " + std::to_string(dim));
    }
  }
  return s;
}

PortfolioModel parse_portfolio(const json& p, const std::filesystem::path& base_dir, double radius) {
  PortfolioModel pm;
  pm.m = field<std::size_t>(p, "m");
  pm.gamma = field_or<double>(p, "gamma", pm.gamma);
  pm.eta = field_or<double>(p, "eta", pm.eta);
  pm.R = field_or<double>(p, "R", pm.R);
  pm.eps = radius;
  if (p.contains("costs")) {
    const json& c = p.at("costs");
    if (!c.is_array()) throw ConfigError("portfolio costs must be a list");
    for (std::size_t k = 0; k < c.size(); ++k) pm.costs.push_back(poly_field(c[k], pm.m, "cost " + std::to_string(k + 1)));
  } else {
    try {
      pm.costs = portfolio_costs(pm.m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (!p.contains("samples")) throw ConfigError("missing key \"samples\"");
  pm.samples = samples_field(p.at("samples"), base_dir, pm.m);
  pm.N = pm.samples.size();
  return pm;
}

json samples_json(const Samples& s) { return s.points; }

}  // namespace

Samples read_samples_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  Samples s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad number \"" + cell + "\"");
      }
    }
    s.points.push_back(std::move(row));
  }
  return s;
}

ModelDocument parse_model(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model must be a JSON object");
  ModelDocument doc;
  const double radius = field_or<double>(j, "radius", 1.0);
  if (j.contains("portfolio")) {
    doc.portfolio = parse_portfolio(j.at("portfolio"), base_dir, radius);
    return doc;
  }

  DroModel m;
  m.support.dim = field<std::size_t>(j, "dim");
  if (m.support.dim == 0) throw ConfigError("dim must be positive");
  m.support.norm_bound = field<double>(j, "norm_bound");
  const json& ineq = j.contains("inequalities") ? j.at("inequalities") : json::array();
  for (std::size_t l = 0; l < ineq.size(); ++l) {
    m.support.inequalities.push_back(poly_field(ineq[l], m.support.dim, "inequality " + std::to_string(l + 1)));
  }
  if (!j.contains("pieces") || !j.at("pieces").is_array() || j.at("pieces").empty()) {
    throw ConfigError("pieces must be a nonempty list of lists");
  }
  const json& pieces = j.at("pieces");
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (!pieces[k].is_array() || pieces[k].empty()) throw ConfigError("pieces must be a list of nonempty lists");
    if (pieces[k].size() != pieces[0].size()) throw ConfigError("every piece needs the same number J of polynomials");
    std::vector<Poly> row;
    for (std::size_t t = 0; t < pieces[k].size(); ++t) {
      row.push_back(poly_field(pieces[k][t], m.support.dim,
                               "piece (" + std::to_string(k + 1) + ", " + std::to_string(t + 1) + ")"));
    }
    m.loss.pieces.push_back(std::move(row));
  }
  if (!j.contains("samples")) throw ConfigError("missing key \"samples\"");
  m.samples = samples_field(j.at("samples"), base_dir, m.support.dim);
  m.radius = radius;
  m.convex = field_or<bool>(j, "convex", false);
  if (j.contains("tau")) {
    const auto brackets = field<std::vector<std::vector<double>>>(j, "tau");
    if (brackets.size() != m.loss.K()) throw ConfigError("tau needs one bracket per piece");
    for (const auto& b : brackets) {
      if (b.size() != 2) throw ConfigError("each tau bracket is [tau1, tau2]");
      m.tau.brackets.emplace_back(b[0], b[1]);
    }
  } else {
    m.tau = crude_tau_bounds(m.loss, m.support.norm_bound);
  }
  doc.dro = std::move(m);
  return doc;
}

ModelDocument load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path), path.parent_path());
}

namespace {

json to_json(const DroModel& m) {
  json j;
  j["dim"] = m.support.dim;
  j["norm_bound"] = m.support.norm_bound;
  j["inequalities"] = json::array();
  for (const auto& h : m.support.inequalities) j["inequalities"].push_back(h.to_string());
  j["pieces"] = json::array();
  for (const auto& row : m.loss.pieces) {
    json r = json::array();
    for (const auto& g : row) r.push_back(g.to_string());
    j["pieces"].push_back(r);
  }
  j["samples"] = samples_json(m.samples);
  j["radius"] = m.radius;
  j["tau"] = json::array();
  for (const auto& [t1, t2] : m.tau.brackets) j["tau"].push_back({t1, t2});
  j["convex"] = m.convex;
  return j;
}

json to_json(const PortfolioModel& pm) {
  json p;
  p["m"] = pm.m;
  p["gamma"] = pm.gamma;
  p["eta"] = pm.eta;
  p["R"] = pm.R;
  p["costs"] = json::array();
  for (const auto& c : pm.costs) p["costs"].push_back(c.to_string());
  p["samples"] = samples_json(pm.samples);
  return json{{"portfolio", p}, {"radius", pm.eps}};
}

json to_json(const ModelDocument& doc) {
  if (doc.portfolio) return to_json(*doc.portfolio);
  if (doc.dro) return to_json(*doc.dro);
  return nullptr;
}

double number_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return field<double>(j, key);
}

}  // namespace

std::string model_to_json(const DroModel& model) { return to_json(model).dump(2) + "\n"; }
std::string model_to_json(const PortfolioModel& pm) { return to_json(pm).dump(2) + "\n"; }

void write_solution(const std::filesystem::path& path, const SolutionArtifact& s) {
  json j;
  j["kind"] = s.kind;
  j["r"] = s.r;
  j["eps"] = s.eps;
  j["status"] = s.status;
  j["bound"] = std::isfinite(s.bound) ? json(s.bound) : json(nullptr);
  j["lambda"] = s.lambda;
  j["alpha"] = s.alpha;
  j["weights"] = s.weights;
  j["tau"] = s.tau;
  j["identity_residual"] = s.identity_residual;
  j["negated"] = s.negated;
  j["model"] = to_json(s.model);
  write_file(path, j.dump(2) + "\n");
}

SolutionArtifact read_solution(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
  SolutionArtifact s;
  s.kind = field<std::string>(j, "kind");
  s.r = field<int>(j, "r");
  s.eps = field<double>(j, "eps");
  s.status = field<std::string>(j, "status");
  s.bound = number_or_nan(j, "bound");
  s.lambda = field<double>(j, "lambda");
  s.alpha = field<std::vector<double>>(j, "alpha");
  s.weights = field_or<std::vector<double>>(j, "weights", {});
  s.tau = field_or<double>(j, "tau", 0.0);
  s.identity_residual = field_or<double>(j, "identity_residual", 0.0);
  s.negated = field_or<bool>(j, "negated", false);
  if (!j.contains("model")) throw ConfigError("solution has no model");
  s.model = parse_model(j.at("model").dump(), path.parent_path());
  return s;
}

}  // namespace wassos
