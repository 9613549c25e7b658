#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bbm/error.hpp"
#include "bbm/field.hpp"
#include "bbm/mollifier.hpp"

namespace bbm::cli {

// Malformed configuration or command line; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

// One experiment. Every field has an explicit default so the resolved
// config written next to the results fully determines the run.
struct ExperimentConfig {
  std::string kind;  // constants density remainder energy perimeter bv pathology maximal sobolev-residual sweep
  int dimension = 0;  // 0: inferred from the field spec, else 1
  std::string field;
  std::string mollifier;
  std::string ladder;     // "<family>:<p1>,<p2>,..." or "<family>:dyadic:<k1>:<k2>"
  std::string operation;  // sweep target: energy density remainder sobolev-residual pathology
  std::string target = "gradient";  // sobolev-residual U: gradient | zero
  double p = 1.0;
  std::vector<std::vector<double>> probes;
  std::int64_t probe_seed = -1;  // >= 0 draws probe_count probes in [-1,1]^d
  int probe_count = 0;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  int sphere_order = 0;
  int radial_level = 4;
  double rel_tol = 1e-6;
  int resolution = 0;  // energy panels per axis, 0 = default
  // perimeter
  std::string shape;
  std::vector<double> n_ladder;
  std::string method = "both";
  double grid_half_width = 1.5;
  int grid_resolution = 512;
  // pathology
  double delta = 0.1;
  std::vector<double> p_ladder;
  // maximal
  std::string check = "weak11";
  int fields = 100;
  std::vector<double> eps_ladder;
  std::string out = "bbm-run";
};

nlohmann::json to_json(const ExperimentConfig& c);
// Validates keys and types; throws UsageError.
ExperimentConfig config_from_json(const nlohmann::json& j);
// Fills inferred values (dimension, default ladders, probes from the seed)
// and checks per-experiment requirements; throws UsageError.
ExperimentConfig resolve(ExperimentConfig c);

Field parse_field(const std::string& spec, int dimension);
int field_dimension(const std::string& spec);  // 0 when the spec does not fix it
RadialMollifier parse_mollifier(const std::string& spec, int dimension);

struct RunOutput {
  std::string csv;
  nlohmann::json summary;
};
// Executes a resolved config. Library errors propagate.
RunOutput run(const ExperimentConfig& c);

// Resolves, runs and writes resolved-config.json, results.csv and
// summary.json (or diagnostic.json on failure) into c.out. Returns the exit code.
int run_to_directory(const ExperimentConfig& c);

// Command-line entry point.
int main(int argc, char** argv);

}  // namespace bbm::cli
