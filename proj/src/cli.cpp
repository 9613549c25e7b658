#include "bbm/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "bbm/constants.hpp"
#include "bbm/convergence.hpp"
#include "bbm/maximal.hpp"
#include "bbm/nonlocal.hpp"
#include "bbm/parallel.hpp"
#include "bbm/pathology.hpp"
#include "bbm/perimeter.hpp"

namespace bbm::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kKinds{"constants", "density", "remainder", "energy", "perimeter", "bv",
                                   "pathology", "maximal", "sobolev-residual", "sweep"};
const std::set<std::string> kSweepOps{"energy", "density", "remainder", "sobolev-residual", "pathology"};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + s + "' is not a number");
  }
  if (used != s.size()) throw UsageError(what + ": '" + s + "' is not a number");
  return v;
}

std::vector<double> to_numbers(const std::string& s, const std::string& what) {
  std::vector<double> v;
  for (const std::string& item : split(s, ',')) v.push_back(to_number(item, what));
  return v;
}

Vec to_vec(const std::vector<double>& v) {
  Vec x{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < v.size() && i < x.size(); ++i) x[i] = v[i];
  return x;
}

// "name:args" -> (name, args)
std::pair<std::string, std::string> head(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, ""};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config key '") + key + "' has the wrong type");
  }
}

QuadratureOptions quad_of(const ExperimentConfig& c) {
  QuadratureOptions q;
  q.sphere_order = c.sphere_order;
  q.radial_level = c.radial_level;
  q.refinement.rel_tol = c.rel_tol;
  return q;
}

EnergyOptions energy_of(const ExperimentConfig& c) {
  EnergyOptions e;
  e.resolution = c.resolution;
  e.quad = quad_of(c);
  return e;
}

MollifierLadder parse_ladder(const std::string& spec, int d) {
  const auto [family, rest] = head(spec);
  MollifierLadder ladder;
  ladder.dimension = d;
  if (family == "indicator") {
    ladder.family = MollifierKind::Indicator;
  } else if (family == "gaussian") {
    ladder.family = MollifierKind::Gaussian;
  } else if (family == "powerlaw") {
    ladder.family = MollifierKind::PowerLaw;
  } else {
    throw UsageError("ladder: unknown family '" + family + "'");
  }
  const std::vector<std::string> parts = split(rest, ':');
  if (!parts.empty() && parts[0] == "dyadic") {
    if (parts.size() != 3) throw UsageError("ladder: expected <family>:dyadic:<k1>:<k2>");
    const int k1 = static_cast<int>(to_number(parts[1], "ladder"));
    const int k2 = static_cast<int>(to_number(parts[2], "ladder"));
    if (k2 < k1) throw UsageError("ladder: k2 < k1");
    // concentration grows with k: ε = 2^{-k}, n = 4^k, δ = 2^{-k}
    for (int k = k1; k <= k2; ++k) {
      ladder.params.push_back(ladder.family == MollifierKind::Gaussian ? std::ldexp(1.0, 2 * k) : std::ldexp(1.0, -k));
    }
  } else {
    ladder.params = to_numbers(rest, "ladder");
  }
  if (ladder.params.empty()) throw UsageError("ladder: no parameters");
  return ladder;
}

std::vector<Vec> probes_of(const ExperimentConfig& c) {
  std::vector<Vec> out;
  for (const auto& p : c.probes) out.push_back(to_vec(p));
  return out;
}

std::string csv_vec(const Vec& x, int d) {
  std::string s;
  for (int a = 0; a < d; ++a) s += (a ? "," : "") + format_double(x[a]);
  return s;
}

std::string probe_header(int d) {
  std::string s;
  for (int a = 0; a < d; ++a) s += ",x" + std::to_string(a);
  return s;
}

// Reference value γ|∇u|^p where a gradient is available.
std::optional<double> density_reference(const Field& u, double p, const Vec& x) {
  if (!has_gradient(u)) return std::nullopt;
  return gamma(dimension(u), p) * std::pow(norm(gradient(u, x)), p);
}

RunOutput run_constants(const ExperimentConfig& c) {
  std::vector<int> dims;
  if (c.dimension > 0) dims.push_back(c.dimension); else dims = {1, 2, 3};
  std::ostringstream csv;
  csv << "name,d,value,provenance\n";
  json tables = json::array();
  for (int d : dims) {
    const ConstantTable t = constant_table(d);
    for (const auto& [name, e] : t.entries) csv << name << ',' << d << ',' << format_double(e.value) << ',' << to_string(e.provenance) << '\n';
    tables.push_back(t.to_json());
  }
  return {csv.str(), {{"tables", tables}}};
}

RunOutput run_pointwise(const ExperimentConfig& c, bool remainder) {
  const Field u = parse_field(c.field, c.dimension);
  const RadialMollifier m = parse_mollifier(c.mollifier, c.dimension);
  const int d = c.dimension;
  std::ostringstream csv;
  csv << "index" << probe_header(d) << ",value,reference\n";
  json values = json::array(), refs = json::array();
  const std::vector<Vec> probes = probes_of(c);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Vec& x = probes[i];
    const double v = remainder ? remainder_density(u, m, c.p, x, quad_of(c)) : pointwise_density(u, m, c.p, x, quad_of(c));
    std::optional<double> ref = remainder ? std::optional<double>(0.0) : density_reference(u, c.p, x);
    csv << i << ',' << csv_vec(x, d) << ',' << format_double(v) << ',' << (ref ? format_double(*ref) : "") << '\n';
    values.push_back(v);
    refs.push_back(ref ? json(*ref) : json(nullptr));
  }
  return {csv.str(), {{"values", values}, {"references", refs}, {"mollifier", m.to_json()}}};
}

RunOutput run_energy(const ExperimentConfig& c) {
  const Field u = parse_field(c.field, c.dimension);
  const RadialMollifier m = parse_mollifier(c.mollifier, c.dimension);
  const double v = energy(u, m, c.p, energy_of(c));
  const double limit = local_energy(u, c.p);
  std::ostringstream csv;
  csv << "value,limit\n" << format_double(v) << ',' << format_double(limit) << '\n';
  return {csv.str(), {{"value", v}, {"limit", limit}}};
}

VectorField target_of(const ExperimentConfig& c, const Field& u) {
  if (c.target == "zero") return [](const Vec&) { return Vec{0.0, 0.0, 0.0}; };
  if (!has_gradient(u)) throw UsageError("target 'gradient' needs a field with a gradient; use --target zero");
  return [u](const Vec& x) { return gradient(u, x); };
}

RunOutput run_residual(const ExperimentConfig& c) {
  const Field u = parse_field(c.field, c.dimension);
  const RadialMollifier m = parse_mollifier(c.mollifier, c.dimension);
  const double v = sobolev_residual(u, m, target_of(c, u), energy_of(c));
  std::ostringstream csv;
  csv << "value\n" << format_double(v) << '\n';
  return {csv.str(), {{"value", v}}};
}

RunOutput run_perimeter(const ExperimentConfig& c) {
  const Field f = parse_field(c.shape, c.dimension);
  const auto* set = std::get_if<IndicatorSet>(&f);
  if (!set) throw UsageError("shape must be ball, interval or box");
  std::vector<PerimeterMethod> methods;
  if (c.method == "bbm" || c.method == "both") methods.push_back(PerimeterMethod::Bbm);
  if (c.method == "degiorgi" || c.method == "both") methods.push_back(PerimeterMethod::DeGiorgi);
  const GridSpec grid{c.grid_half_width, c.grid_resolution};
  std::ostringstream csv;
  csv << "method,n,value,exact,rel_error\n";
  json estimates = json::array();
  for (PerimeterMethod method : methods) {
    for (double n : c.n_ladder) {
      const PerimeterEstimate e = estimate_perimeter(*set, method, n, grid, energy_of(c));
      csv << to_string(method) << ',' << format_double(n) << ',' << format_double(e.value) << ','
          << format_double(e.exact) << ',' << format_double(e.rel_error) << '\n';
      estimates.push_back(e.to_json());
    }
  }
  return {csv.str(), {{"estimates", estimates}}};
}

std::string report_rows(const ConvergenceReport& r, const std::string& prefix) {
  std::istringstream in(r.to_csv());
  std::string line, out;
  std::getline(in, line);  // header
  while (std::getline(in, line)) out += prefix + line + '\n';
  return out;
}

RunOutput run_bv(const ExperimentConfig& c) {
  const Field f = parse_field(c.field, 1);
  const auto* u = std::get_if<BVField1D>(&f);
  if (!u) throw UsageError("bv needs a step or mixed field");
  const MollifierLadder ladder = parse_ladder(c.ladder, 1);
  std::ostringstream csv;
  csv << "probe,index,param,value,limit,abs_error,rel_error\n";
  json reports = json::array();
  for (const Vec& x : probes_of(c)) {
    const ConvergenceReport r = bv_pointwise_limit(*u, ladder, x[0], quad_of(c));
    csv << report_rows(r, format_double(x[0]) + ",");
    reports.push_back(r.to_json());
  }
  return {csv.str(), {{"reports", reports}}};
}

PathologyCase case_of(const ExperimentConfig& c, double p) {
  PathologyCase pc;
  pc.dimension = c.dimension;
  pc.p = p;
  pc.delta = c.delta;
  return pc;
}

RunOutput run_pathology(const ExperimentConfig& c) {
  const Vec x = to_vec(c.probes.front());
  std::ostringstream csv;
  csv << "p,index,param,value,limit,abs_error,rel_error\n";
  json reports = json::array();
  std::vector<double> ps = c.p_ladder.empty() ? std::vector<double>{c.p} : c.p_ladder;
  const bool control = !c.field.empty() && c.field != "pathological";
  const std::optional<AnalyticField> ctl =
      control ? std::optional<AnalyticField>(std::get<AnalyticField>(parse_field(c.field, c.dimension))) : std::nullopt;
  for (const ScanEntry& e : threshold_scan(c.dimension, c.delta, x, ps, ctl)) {
    csv << report_rows(e.report, format_double(e.p) + ",");
    json r = e.report.to_json();
    r["p"] = e.p;
    reports.push_back(r);
  }
  json summary{{"reports", reports}};
  if (ps.size() == 1) summary["classification"] = reports[0]["classification"];
  return {csv.str(), summary};
}

RunOutput run_maximal(const ExperimentConfig& c) {
  const int d = c.dimension;
  MaximalOptions opts;
  std::ostringstream csv;
  if (c.check == "weak11") {
    csv << "field,eps,measure,bound,pass\n";
    bool all = true;
    for (int i = 0; i < c.fields; ++i) {
      const GridField f = random_grid_field(d, c.grid_resolution, c.grid_half_width, c.seed + i);
      for (const Weak11Row& row : weak11_check(f, c.eps_ladder, opts)) {
        csv << i << ',' << format_double(row.eps) << ',' << format_double(row.measure) << ',' << format_double(row.bound)
            << ',' << (row.pass() ? "true" : "false") << '\n';
        all = all && row.pass();
      }
    }
    return {csv.str(), {{"all_pass", all}, {"fields", c.fields}}};
  }
  // check == "value": M f at the probes for a sampled field
  const Field u = parse_field(c.field, d);
  const GridField g = GridField::sample(d, c.grid_half_width, c.grid_resolution, [&](const Vec& x) { return eval(u, x); });
  csv << "index" << probe_header(d) << ",value\n";
  json values = json::array();
  const std::vector<Vec> probes = probes_of(c);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double v = maximal_function(g, probes[i], kInfinity, opts);
    csv << i << ',' << csv_vec(probes[i], d) << ',' << format_double(v) << '\n';
    values.push_back(v);
  }
  return {csv.str(), {{"values", values}}};
}

RunOutput run_sweep(const ExperimentConfig& c) {
  if (c.operation == "pathology") {
    PathologyCase pc = case_of(c, c.p);
    const ConvergenceReport r = divergence_probe(pc, to_vec(c.probes.front()));
    return {r.to_csv(), {{"report", r.to_json()}, {"classification", to_string(r.classification)}}};
  }
  const Field u = parse_field(c.field, c.dimension);
  const MollifierLadder ladder = parse_ladder(c.ladder, c.dimension);
  std::function<double(const RadialMollifier&)> op;
  std::optional<double> limit;
  const Vec x = c.probes.empty() ? Vec{0.0, 0.0, 0.0} : to_vec(c.probes.front());
  if (c.operation == "energy") {
    op = [&](const RadialMollifier& m) { return energy(u, m, c.p, energy_of(c)); };
    limit = local_energy(u, c.p);
  } else if (c.operation == "density") {
    op = [&](const RadialMollifier& m) { return pointwise_density(u, m, c.p, x, quad_of(c)); };
    limit = density_reference(u, c.p, x);
    if (!limit) throw UsageError("density sweep needs a field with a gradient");
  } else if (c.operation == "remainder") {
    op = [&](const RadialMollifier& m) { return remainder_density(u, m, c.p, x, quad_of(c)); };
    limit = 0.0;
  } else {
    const VectorField U = target_of(c, u);
    op = [&, U](const RadialMollifier& m) { return sobolev_residual(u, m, U, energy_of(c)); };
    limit = 0.0;
  }
  const ConvergenceReport r = convergence_study(c.operation, op, ladder, limit);
  return {r.to_csv(), {{"report", r.to_json()}, {"classification", to_string(r.classification)}}};
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << body;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  return json{{"kind", c.kind},
              {"dimension", c.dimension},
              {"field", c.field},
              {"mollifier", c.mollifier},
              {"ladder", c.ladder},
              {"operation", c.operation},
              {"target", c.target},
              {"p", c.p},
              {"probes", c.probes},
              {"probe_seed", c.probe_seed},
              {"probe_count", c.probe_count},
              {"seed", c.seed},
              {"workers", c.workers},
              {"sphere_order", c.sphere_order},
              {"radial_level", c.radial_level},
              {"rel_tol", c.rel_tol},
              {"resolution", c.resolution},
              {"shape", c.shape},
              {"n_ladder", c.n_ladder},
              {"method", c.method},
              {"grid_half_width", c.grid_half_width},
              {"grid_resolution", c.grid_resolution},
              {"delta", c.delta},
              {"p_ladder", c.p_ladder},
              {"check", c.check},
              {"fields", c.fields},
              {"eps_ladder", c.eps_ladder},
              {"out", c.out}};
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  const json known = to_json(ExperimentConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw UsageError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = get<std::decay_t<decltype(field)>>(j, key);
  };
  opt("kind", c.kind);
  opt("dimension", c.dimension);
  opt("field", c.field);
  opt("mollifier", c.mollifier);
  opt("ladder", c.ladder);
  opt("operation", c.operation);
  opt("target", c.target);
  opt("p", c.p);
  opt("probes", c.probes);
  opt("probe_seed", c.probe_seed);
  opt("probe_count", c.probe_count);
  opt("seed", c.seed);
  opt("workers", c.workers);
  opt("sphere_order", c.sphere_order);
  opt("radial_level", c.radial_level);
  opt("rel_tol", c.rel_tol);
  opt("resolution", c.resolution);
  opt("shape", c.shape);
  opt("n_ladder", c.n_ladder);
  opt("method", c.method);
  opt("grid_half_width", c.grid_half_width);
  opt("grid_resolution", c.grid_resolution);
  opt("delta", c.delta);
  opt("p_ladder", c.p_ladder);
  opt("check", c.check);
  opt("fields", c.fields);
  opt("eps_ladder", c.eps_ladder);
  opt("out", c.out);
  return c;
}

int field_dimension(const std::string& spec) {
  const auto [name, args] = head(spec);
  if (name == "linear") return static_cast<int>(split(args, ',').size());
  if (name == "x2" || name == "step" || name == "mixed" || name == "interval") return 1;
  return 0;
}

namespace {

Field build_field(const std::string& spec, int d) {
  const auto [name, args] = head(spec);
  const std::vector<double> a = args.empty() ? std::vector<double>{} : to_numbers(args, "field");
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (a.size() < lo || a.size() > hi) throw UsageError("field '" + spec + "': wrong number of arguments");
  };
  if (name == "linear") {
    need(1, 3);
    return linear_field(static_cast<int>(a.size()), to_vec(a));
  }
  if (name == "constant") {
    need(1, 1);
    return constant_field(d, a[0]);
  }
  if (name == "bump") {
    need(0, 0);
    return gaussian_bump(d);
  }
  if (name == "x2") {
    need(0, 0);
    return quadratic_1d();
  }
  if (name == "step") {
    need(2, 3);
    return step_field(a[0], a[1], a.size() == 3 ? a[2] : 1.0);
  }
  if (name == "mixed") {  // x² plus one jump
    need(1, 2);
    return BVField1D(quadratic_1d(), {{a[0], a.size() == 2 ? a[1] : 1.0}});
  }
  if (name == "pathological") {
    need(0, 0);
    return pathological_field(d);
  }
  if (name == "interval") {
    need(0, 2);
    if (a.size() == 1) throw UsageError("interval needs two endpoints");
    return IndicatorSet(1, Interval{a.empty() ? 0.0 : a[0], a.empty() ? 1.0 : a[1]});
  }
  if (name == "ball") {
    need(0, 1);
    return IndicatorSet(d, Ball{{0.0, 0.0, 0.0}, a.empty() ? 1.0 : a[0]});
  }
  if (name == "box") {
    need(0, 1);
    const double s = a.empty() ? 1.0 : a[0];
    Vec hi{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) hi[i] = s;
    return IndicatorSet(d, Box{{0.0, 0.0, 0.0}, hi});
  }
  throw UsageError("unknown field '" + spec + "'");
}

RadialMollifier build_mollifier(const std::string& spec, int d) {
  const auto [name, args] = head(spec);
  const std::vector<std::string> parts = split(args, ':');
  if (parts.empty() || parts[0].empty()) throw UsageError("mollifier '" + spec + "' needs a parameter");
  const double v = to_number(parts[0], "mollifier");
  if (name == "indicator" && parts.size() == 1) return RadialMollifier::indicator(d, v);
  if (name == "gaussian" && parts.size() == 1) return RadialMollifier::gaussian(d, v);
  if (name == "powerlaw" && parts.size() <= 2) {
    if (parts.size() == 2 && parts[1] != "normalized" && parts[1] != "raw") throw UsageError("powerlaw flag must be normalized or raw");
    return RadialMollifier::power_law(d, v, parts.size() == 2 && parts[1] == "normalized");
  }
  throw UsageError("unknown mollifier '" + spec + "'");
}

}  // namespace

// Bad parameters inside a spec string are the user's input, not a numerical
// failure: report them as usage errors.
Field parse_field(const std::string& spec, int d) {
  try {
    return build_field(spec, d);
  } catch (const DomainError& e) {
    throw UsageError("field '" + spec + "': " + e.what());
  }
}

RadialMollifier parse_mollifier(const std::string& spec, int d) {
  try {
    return build_mollifier(spec, d);
  } catch (const DomainError& e) {
    throw UsageError("mollifier '" + spec + "': " + e.what());
  }
}

ExperimentConfig resolve(ExperimentConfig c) {
  if (!kKinds.count(c.kind)) throw UsageError("unknown experiment kind '" + c.kind + "'");
  const std::string& spec = c.kind == "perimeter" ? c.shape : c.field;
  const int implied = field_dimension(spec);
  if (c.dimension == 0) c.dimension = implied ? implied : (c.kind == "pathology" || (c.kind == "sweep" && c.operation == "pathology") ? 2 : (c.kind == "constants" ? 0 : 1));
  if (implied && c.dimension != implied) throw UsageError("field '" + spec + "' fixes d = " + std::to_string(implied));
  if (c.kind != "constants" && (c.dimension < 1 || c.dimension > 3)) throw UsageError("dimension must be 1, 2 or 3");
  if (c.kind == "constants" && (c.dimension < 0 || c.dimension > 3)) throw UsageError("dimension must be 0..3");
  if (c.p < 1.0) throw UsageError("p must be >= 1");
  if (c.radial_level < 0 || c.sphere_order < 0 || c.resolution < 0) throw UsageError("quadrature overrides must be nonnegative");
  if (!(c.rel_tol > 0.0)) throw UsageError("rel_tol must be positive");

  if (c.probe_seed >= 0) {
    if (c.probe_count <= 0) throw UsageError("probe_seed needs probe_count > 0");
    std::mt19937_64 rng(static_cast<std::uint64_t>(c.probe_seed));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    c.probes.clear();
    for (int i = 0; i < c.probe_count; ++i) {
      std::vector<double> x(c.dimension);
      for (double& v : x) v = unit(rng);
      c.probes.push_back(x);
    }
    c.probe_seed = -1;
    c.probe_count = 0;
  }
  for (const auto& x : c.probes) {
    if (static_cast<int>(x.size()) != c.dimension) throw UsageError("probe dimension differs from d");
  }

  const bool pointwise = c.kind == "density" || c.kind == "remainder" || c.kind == "bv" || c.kind == "pathology" ||
                         (c.kind == "maximal" && c.check == "value") ||
                         (c.kind == "sweep" && (c.operation == "density" || c.operation == "remainder" || c.operation == "pathology"));
  if (pointwise && c.probes.empty()) throw UsageError("probes: list must not be empty");

  const bool needs_field = c.kind == "density" || c.kind == "remainder" || c.kind == "energy" || c.kind == "bv" ||
                           c.kind == "sobolev-residual" || (c.kind == "maximal" && c.check == "value") ||
                           (c.kind == "sweep" && c.operation != "pathology");
  if (needs_field && c.field.empty()) throw UsageError("field: required for " + c.kind);
  if (needs_field) (void)parse_field(c.field, c.dimension);
  const bool needs_mollifier = c.kind == "density" || c.kind == "remainder" || c.kind == "energy" || c.kind == "sobolev-residual";
  if (needs_mollifier && c.mollifier.empty()) throw UsageError("mollifier: required for " + c.kind);
  if (needs_mollifier) (void)parse_mollifier(c.mollifier, c.dimension);
  if (c.target != "gradient" && c.target != "zero") throw UsageError("target must be gradient or zero");

  if (c.kind == "bv" && c.ladder.empty()) c.ladder = "indicator:dyadic:1:10";
  if (c.kind == "sweep") {
    if (!kSweepOps.count(c.operation)) throw UsageError("sweep operation must be one of energy, density, remainder, sobolev-residual, pathology");
    if (c.operation != "pathology") {
      if (c.ladder.empty()) throw UsageError("ladder: required for sweep");
      if (parse_ladder(c.ladder, c.dimension).size() < 3) throw UsageError("ladder: sweep needs at least 3 entries");
    }
  }
  if (!c.ladder.empty()) (void)parse_ladder(c.ladder, c.dimension);

  if (c.kind == "perimeter") {
    if (c.shape.empty()) throw UsageError("shape: required for perimeter");
    if (!std::holds_alternative<IndicatorSet>(parse_field(c.shape, c.dimension))) throw UsageError("shape must be ball, interval or box");
    if (c.method != "bbm" && c.method != "degiorgi" && c.method != "both") throw UsageError("method must be bbm, degiorgi or both");
    if (c.n_ladder.empty()) c.n_ladder = {1024.0};
    for (double n : c.n_ladder) {
      if (!(n > 0.0)) throw UsageError("n must be positive");
    }
  }
  if (c.grid_resolution < 2 || !(c.grid_half_width > 0.0)) throw UsageError("grid must have resolution >= 2 and positive half width");
  if (c.kind == "pathology" || (c.kind == "sweep" && c.operation == "pathology")) {
    if (c.dimension < 2) throw UsageError("pathology needs d >= 2");
    if (c.probes.size() != 1) throw UsageError("pathology takes exactly one probe");
  }
  if (c.kind == "maximal") {
    if (c.check != "weak11" && c.check != "value") throw UsageError("check must be weak11 or value");
    if (c.dimension > 2) throw UsageError("maximal supports d = 1, 2");
    if (c.check == "weak11") {
      if (c.fields <= 0) throw UsageError("fields must be positive");
      if (c.eps_ladder.empty()) c.eps_ladder = {0.05, 0.1, 0.25, 0.5};
    }
  }
  return c;
}

RunOutput run(const ExperimentConfig& c) {
  if (c.kind == "constants") return run_constants(c);
  if (c.kind == "density") return run_pointwise(c, false);
  if (c.kind == "remainder") return run_pointwise(c, true);
  if (c.kind == "energy") return run_energy(c);
  if (c.kind == "sobolev-residual") return run_residual(c);
  if (c.kind == "perimeter") return run_perimeter(c);
  if (c.kind == "bv") return run_bv(c);
  if (c.kind == "pathology") return run_pathology(c);
  if (c.kind == "maximal") return run_maximal(c);
  return run_sweep(c);
}

int run_to_directory(const ExperimentConfig& raw) {
  ExperimentConfig c;
  try {
    c = resolve(raw);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  write_file(dir / "resolved-config.json", to_json(c).dump(2) + "\n");
  set_worker_count(c.workers);
  const auto start = std::chrono::steady_clock::now();
  try {
    RunOutput out = run(c);
    out.summary["kind"] = c.kind;
    out.summary["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(dir / "results.csv", out.csv);
    write_file(dir / "summary.json", out.summary.dump(2) + "\n");
    std::cout << out.csv;
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    const json diag{{"error", e.what()}, {"kind", c.kind}, {"config", to_json(c)}};
    write_file(dir / "diagnostic.json", diag.dump(2) + "\n");
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal BBM functionals, perimeter estimators and maximal functions"};
  app.require_subcommand(1);

  std::string config_path;
  ExperimentConfig flags;
  std::vector<std::string> probe_specs;
  std::string n_list, p_list, eps_list;
  double n_single = 0.0;

  std::vector<CLI::App*> subs;
  for (const std::string& kind : kKinds) subs.push_back(app.add_subcommand(kind, "run the " + kind + " experiment"));
  for (CLI::App* sub : subs) {
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--d", flags.dimension, "dimension");
    sub->add_option("--field", flags.field, "field spec, e.g. linear:3,0 bump x2 step:0,1 pathological");
    sub->add_option("--mollifier", flags.mollifier, "indicator:eps | gaussian:n | powerlaw:delta[:normalized]");
    sub->add_option("--ladder", flags.ladder, "<family>:<params> or <family>:dyadic:<k1>:<k2>");
    sub->add_option("--operation", flags.operation, "sweep target");
    sub->add_option("--target", flags.target, "sobolev-residual U: gradient or zero");
    sub->add_option("--p", flags.p, "exponent");
    sub->add_option("--probe", probe_specs, "probe point a,b,...; repeatable");
    sub->add_option("--probe-seed", flags.probe_seed, "draw probes from this seed");
    sub->add_option("--probe-count", flags.probe_count, "number of seeded probes");
    sub->add_option("--seed", flags.seed, "seed for random fields");
    sub->add_option("--workers", flags.workers, "worker threads, 0 = all cores");
    sub->add_option("--sphere-order", flags.sphere_order, "angular quadrature order");
    sub->add_option("--radial-level", flags.radial_level, "radial refinement level");
    sub->add_option("--rel-tol", flags.rel_tol, "refinement tolerance");
    sub->add_option("--resolution", flags.resolution, "energy panels per axis");
    sub->add_option("--shape", flags.shape, "ball[:r] | interval[:a,b] | box[:s]");
    sub->add_option("--n", n_single, "Gaussian concentration");
    sub->add_option("--n-ladder", n_list, "comma-separated n values");
    sub->add_option("--method", flags.method, "bbm, degiorgi or both");
    sub->add_option("--grid-half-width", flags.grid_half_width, "grid box half width");
    sub->add_option("--grid-resolution", flags.grid_resolution, "grid nodes per axis");
    sub->add_option("--delta", flags.delta, "power-law exponent");
    sub->add_option("--p-ladder", p_list, "comma-separated exponents for a threshold scan");
    sub->add_option("--check", flags.check, "weak11 or value");
    sub->add_option("--fields", flags.fields, "number of random fields");
    sub->add_option("--eps", eps_list, "comma-separated level-set thresholds");
    sub->add_option("--out", flags.out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    ExperimentConfig c;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read " + config_path);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
      }
      c = config_from_json(j);
      if (!c.kind.empty() && c.kind != sub->get_name()) throw UsageError("config kind differs from the subcommand");
    }
    c.kind = sub->get_name();
    // explicit flags override the config file
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--d")) c.dimension = flags.dimension;
    if (given("--field")) c.field = flags.field;
    if (given("--mollifier")) c.mollifier = flags.mollifier;
    if (given("--ladder")) c.ladder = flags.ladder;
    if (given("--operation")) c.operation = flags.operation;
    if (given("--target")) c.target = flags.target;
    if (given("--p")) c.p = flags.p;
    if (given("--probe")) {
      c.probes.clear();
      for (const std::string& s : probe_specs) c.probes.push_back(to_numbers(s, "probe"));
    }
    if (given("--probe-seed")) c.probe_seed = flags.probe_seed;
    if (given("--probe-count")) c.probe_count = flags.probe_count;
    if (given("--seed")) c.seed = flags.seed;
    if (given("--workers")) c.workers = flags.workers;
    if (given("--sphere-order")) c.sphere_order = flags.sphere_order;
    if (given("--radial-level")) c.radial_level = flags.radial_level;
    if (given("--rel-tol")) c.rel_tol = flags.rel_tol;
    if (given("--resolution")) c.resolution = flags.resolution;
    if (given("--shape")) c.shape = flags.shape;
    if (given("--n")) c.n_ladder = {n_single};
    if (given("--n-ladder")) c.n_ladder = to_numbers(n_list, "n-ladder");
    if (given("--method")) c.method = flags.method;
    if (given("--grid-half-width")) c.grid_half_width = flags.grid_half_width;
    if (given("--grid-resolution")) c.grid_resolution = flags.grid_resolution;
    if (given("--delta")) c.delta = flags.delta;
    if (given("--p-ladder")) c.p_ladder = to_numbers(p_list, "p-ladder");
    if (given("--check")) c.check = flags.check;
    if (given("--fields")) c.fields = flags.fields;
    if (given("--eps")) c.eps_ladder = to_numbers(eps_list, "eps");
    if (given("--out")) c.out = flags.out;
    return run_to_directory(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace bbm::cli
