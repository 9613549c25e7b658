#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bbm/mollifier.hpp"

namespace bbm {

enum class Classification { Converging, Diverging, Stalled };
std::string to_string(Classification c);

// Limit: errors are |value - limit|.
// LowerBound: no limit; values are monotone certified lower bounds and the
// "error" of entry k is the increment |value_k - value_{k-1}|.
enum class ReportMode { Limit, LowerBound };

struct ClassifierConfig {
  double rel_tol = 2e-2;
  double growth_factor = 1.5;
  int growth_run = 4;
  double improving_fraction = 0.75;
  // LowerBound mode: increments nondecreasing over this many trailing pairs
  // also counts as divergence.
  int increment_run = 8;
  double abs_floor = 1e-12;
};

struct ConvergenceReport {
  std::string label;
  ReportMode mode = ReportMode::Limit;
  std::vector<double> params;
  std::vector<double> values;
  std::optional<double> limit;
  std::vector<double> abs_errors;  // NaN where undefined
  std::vector<double> rel_errors;
  Classification classification = Classification::Stalled;
  int longest_growth_run = 0;  // consecutive pairs with value ratio >= growth_factor

  // Columns: index,param,value,limit,abs_error,rel_error
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

ConvergenceReport make_report(std::string label, std::vector<double> params, std::vector<double> values,
                              std::optional<double> limit, ReportMode mode = ReportMode::Limit,
                              const ClassifierConfig& config = {});

// Ladder of one mollifier family over its concentration parameter
// (ε for Indicator, n for Gaussian, δ for PowerLaw).
struct MollifierLadder {
  MollifierKind family = MollifierKind::Indicator;
  int dimension = 1;
  std::vector<double> params;
  bool normalized = false;

  RadialMollifier at(std::size_t i) const;
  std::size_t size() const { return params.size(); }
};

// ε = base^{-k}, k = k_from..k_to.
MollifierLadder dyadic_indicator_ladder(int d, int k_from, int k_to, double base = 2.0);

// Evaluates op on each ladder entry and classifies against `limit`.
ConvergenceReport convergence_study(const std::string& label, const std::function<double(const RadialMollifier&)>& op,
                                    const MollifierLadder& ladder, std::optional<double> limit,
                                    const ClassifierConfig& config = {});

std::string format_double(double v);

}  // namespace bbm
