#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wassos/apps.hpp"
#include "wassos/model.hpp"

namespace wassos {

/// Malformed or inconsistent configuration or model input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model document holds either a general DRO model or a portfolio model.
///
/// General form:
///   {"dim": 1, "norm_bound": 12, "inequalities": ["x1", "12 - x1"],
///    "pieces": [["-x1", "0"]], "samples": [[3.1], [5.0]] or "data.csv",
///    "radius": 0.5, "tau": [[20, -20]], "convex": false}
/// Portfolio form:
///   {"portfolio": {"m": 3, "gamma": 10, "eta": 0.2, "R": 1,
///    "samples": [[...]], "costs": ["..."]}, "radius": 0.5}
struct ModelDocument {
  std::optional<DroModel> dro;
  std::optional<PortfolioModel> portfolio;
};

/// Relative sample paths resolve against `base_dir`.
ModelDocument parse_model(const std::string& json_text, const std::filesystem::path& base_dir = {});
ModelDocument load_model(const std::filesystem::path& path);
std::string model_to_json(const DroModel& model);
std::string model_to_json(const PortfolioModel& pm);

/// N rows of m comma-separated values; blank lines and '#' comments skipped.
Samples read_samples_csv(const std::filesystem::path& path);

/// What a solve leaves behind for later oracle checks.
struct SolutionArtifact {
  std::string kind;
  int r = 0;
  double eps = 0.0;
  std::string status;
  double bound = 0.0;
  double lambda = 0.0;
  std::vector<double> alpha;
  std::vector<double> weights;
  double tau = 0.0;
  double identity_residual = 0.0;
  /// Whether the bound is reported with its sign flipped (revenue).
  bool negated = false;
  ModelDocument model;
};

void write_solution(const std::filesystem::path& path, const SolutionArtifact& s);
SolutionArtifact read_solution(const std::filesystem::path& path);

}  // namespace wassos
