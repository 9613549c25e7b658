#include "bbm/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "bbm/error.hpp"

namespace bbm {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Converging: return "converging";
    case Classification::Diverging: return "diverging";
    case Classification::Stalled: return "stalled";
  }
  return "stalled";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ConvergenceReport make_report(std::string label, std::vector<double> params, std::vector<double> values,
                              std::optional<double> limit, ReportMode mode, const ClassifierConfig& config) {
  if (params.size() != values.size()) throw DomainError("report: params and values differ in length");
  if (values.empty()) throw DomainError("report: empty ladder");
  ConvergenceReport r;
  r.label = std::move(label);
  r.mode = mode;
  r.params = std::move(params);
  r.values = std::move(values);
  r.limit = limit;
  const std::size_t n = r.values.size();
  r.abs_errors.assign(n, kNaN);
  r.rel_errors.assign(n, kNaN);

  if (mode == ReportMode::Limit) {
    if (!limit) throw DomainError("report: limit mode needs a limit");
    const double scale = std::abs(*limit) > config.abs_floor ? std::abs(*limit) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      r.abs_errors[i] = std::abs(r.values[i] - *limit);
      r.rel_errors[i] = r.abs_errors[i] / scale;
    }
  } else {
    for (std::size_t i = 1; i < n; ++i) {
      r.abs_errors[i] = std::abs(r.values[i] - r.values[i - 1]);
      const double scale = std::abs(r.values[i]) > config.abs_floor ? std::abs(r.values[i]) : 1.0;
      r.rel_errors[i] = r.abs_errors[i] / scale;
    }
  }

  // growth runs on the values themselves
  int run = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (r.values[i - 1] > 0.0 && r.values[i] >= config.growth_factor * r.values[i - 1]) {
      r.longest_growth_run = std::max(r.longest_growth_run, ++run);
    } else {
      run = 0;
    }
  }
  bool diverging = r.longest_growth_run >= config.growth_run;

  // error sequence the improvement test runs on
  const std::size_t first = mode == ReportMode::Limit ? 0 : 1;
  std::size_t pairs = 0, improving = 0;
  for (std::size_t i = first + 1; i < n; ++i) {
    ++pairs;
    const double floor = config.abs_floor * std::max(1.0, std::abs(r.values[i]));
    if (r.abs_errors[i] <= r.abs_errors[i - 1] || r.abs_errors[i] <= floor) ++improving;
  }

  if (mode == ReportMode::LowerBound && !diverging && n > first + static_cast<std::size_t>(config.increment_run)) {
    bool nondecreasing = true;
    for (std::size_t i = n - config.increment_run; i < n; ++i) {
      if (!(r.abs_errors[i] >= r.abs_errors[i - 1]) || !(r.rel_errors[i] > 1e-12)) {
        nondecreasing = false;
        break;
      }
    }
    diverging = nondecreasing;
  }

  const double final_rel = r.rel_errors.back();
  const bool improves = pairs == 0 || improving >= config.improving_fraction * pairs;
  if (diverging) {
    r.classification = Classification::Diverging;
  } else if (improves && final_rel < config.rel_tol) {
    r.classification = Classification::Converging;
  } else {
    r.classification = Classification::Stalled;
  }
  return r;
}

std::string ConvergenceReport::to_csv() const {
  std::ostringstream out;
  out << "index,param,value,limit,abs_error,rel_error\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << i << ',' << format_double(params[i]) << ',' << format_double(values[i]) << ','
        << (limit ? format_double(*limit) : "") << ',' << format_double(abs_errors[i]) << ','
        << format_double(rel_errors[i]) << '\n';
  }
  return out.str();
}

nlohmann::json ConvergenceReport::to_json() const {
  auto nullable = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) {
      if (std::isfinite(x)) a.push_back(x); else a.push_back(nullptr);
    }
    return a;
  };
  nlohmann::json j;
  j["label"] = label;
  j["mode"] = mode == ReportMode::Limit ? "limit" : "lower_bound";
  j["classification"] = to_string(classification);
  j["params"] = params;
  j["values"] = nullable(values);
  j["limit"] = limit ? nlohmann::json(*limit) : nlohmann::json(nullptr);
  j["abs_errors"] = nullable(abs_errors);
  j["rel_errors"] = nullable(rel_errors);
  j["final_rel_error"] = std::isfinite(rel_errors.back()) ? nlohmann::json(rel_errors.back()) : nlohmann::json(nullptr);
  j["longest_growth_run"] = longest_growth_run;
  return j;
}

RadialMollifier MollifierLadder::at(std::size_t i) const {
  const double p = params.at(i);
  switch (family) {
    case MollifierKind::Indicator: return RadialMollifier::indicator(dimension, p);
    case MollifierKind::Gaussian: return RadialMollifier::gaussian(dimension, p);
    case MollifierKind::PowerLaw: return RadialMollifier::power_law(dimension, p, normalized);
    case MollifierKind::Custom: break;
  }
  throw UnsupportedError("custom mollifiers cannot form a ladder");
}

MollifierLadder dyadic_indicator_ladder(int d, int k_from, int k_to, double base) {
  MollifierLadder ladder;
  ladder.family = MollifierKind::Indicator;
  ladder.dimension = d;
  for (int k = k_from; k <= k_to; ++k) ladder.params.push_back(std::pow(base, -k));
  return ladder;
}

ConvergenceReport convergence_study(const std::string& label, const std::function<double(const RadialMollifier&)>& op,
                                    const MollifierLadder& ladder, std::optional<double> limit,
                                    const ClassifierConfig& config) {
  if (ladder.size() == 0) throw DomainError("convergence_study: empty ladder");
  std::vector<double> values;
  values.reserve(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i) values.push_back(op(ladder.at(i)));
  return make_report(label, ladder.params, std::move(values), limit,
                     limit ? ReportMode::Limit : ReportMode::LowerBound, config);
}

}  // namespace bbm
