#include "bbm/constants.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>

#include "bbm/error.hpp"
#include "bbm/perimeter.hpp"
#include "bbm/quadrature.hpp"

namespace bbm {

namespace {

void check_dimension(int d) {
  if (d < 1 || d > 3) throw UnsupportedError("unsupported dimension " + std::to_string(d) + " (need 1, 2 or 3)");
}

std::mutex g_bd_mutex;
std::array<std::optional<double>, 4> g_bd_cache;

double calibrate_degiorgi(int d) {
  // Half-space flux per unit boundary area at two concentrations.
  const double coarse = degiorgi_halfspace_flux(d, 1024.0, 4096);
  const double fine = degiorgi_halfspace_flux(d, 4096.0, 4096);
  if (!(fine > 0.0) || !std::isfinite(fine) || std::abs(fine - coarse) > 1e-3 * fine) {
    throw CalibrationError("De Giorgi calibration did not converge in d = " + std::to_string(d));
  }
  return fine;
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm: return "closed-form";
    case Provenance::Quadrature: return "quadrature";
    case Provenance::Calibrated: return "calibrated";
  }
  return "unknown";
}

double gamma_quadrature(int d, double p, int order, const Vec& e) {
  check_dimension(d);
  if (!(p >= 1.0)) throw DomainError("gamma needs p >= 1");
  if (order <= 0) order = d == 3 ? 128 : 256;
  // pole on e: the kink of |σ·e| falls on a panel boundary for any direction
  const SphereRule rule = align_pole(sphere_rule(d, order), e);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * std::pow(std::abs(dot(rule.nodes[i], e)), p);
  return sum;
}

double gamma_quadrature(int d, double p, int order) {
  Vec e{0.0, 0.0, 0.0};
  e[d - 1] = 1.0;
  return gamma_quadrature(d, p, order, e);
}

double gamma(int d, double p) {
  check_dimension(d);
  if (!(p >= 1.0)) throw DomainError("gamma needs p >= 1");
  if (d == 1) return 2.0;
  if (p == 1.0) return d == 2 ? 4.0 : 2.0 * std::numbers::pi;
  return gamma_quadrature(d, p, 0);
}

double gaussian_norm_const(int d) {
  check_dimension(d);
  return 2.0 / std::tgamma(0.5 * (d + 1));
}

double bbm_perimeter_const(int d) { return gamma(d, 1.0) / (2.0 * gaussian_norm_const(d)); }

double degiorgi_const_closed_form(int d) {
  check_dimension(d);
  return std::pow(std::numbers::pi, 0.5 * d);
}

double degiorgi_const(int d) {
  check_dimension(d);
  std::lock_guard lock(g_bd_mutex);
  if (!g_bd_cache[d]) g_bd_cache[d] = calibrate_degiorgi(d);
  return *g_bd_cache[d];
}

nlohmann::json ConstantTable::to_json() const {
  nlohmann::json j;
  j["dimension"] = dimension;
  for (const auto& [name, entry] : entries) {
    j["entries"][name] = {{"value", entry.value}, {"provenance", to_string(entry.provenance)}};
  }
  return j;
}

ConstantTable constant_table(int d) {
  check_dimension(d);
  ConstantTable t;
  t.dimension = d;
  t.entries["gamma_1"] = {gamma(d, 1.0), Provenance::ClosedForm};
  t.entries["gamma_2"] = {gamma(d, 2.0), d == 1 ? Provenance::ClosedForm : Provenance::Quadrature};
  t.entries["gamma_3"] = {gamma(d, 3.0), d == 1 ? Provenance::ClosedForm : Provenance::Quadrature};
  t.entries["C"] = {gaussian_norm_const(d), Provenance::ClosedForm};
  t.entries["A"] = {bbm_perimeter_const(d), Provenance::ClosedForm};
  t.entries["B"] = {degiorgi_const(d), Provenance::Calibrated};
  return t;
}

void save_constants_cache(const std::string& path) {
  nlohmann::json j;
  for (int d = 1; d <= 3; ++d) {
    const ConstantTable t = constant_table(d);
    for (const auto& [name, entry] : t.entries) j[name][std::to_string(d)] = entry.value;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write constants cache '" + path + "'");
  out << j.dump(2) << "\n";
}

void load_constants_cache(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read constants cache '" + path + "'");
  const nlohmann::json j = nlohmann::json::parse(in);
  if (!j.contains("B")) return;
  std::lock_guard lock(g_bd_mutex);
  for (int d = 1; d <= 3; ++d) {
    const std::string key = std::to_string(d);
    if (j["B"].contains(key)) g_bd_cache[d] = j["B"][key].get<double>();
  }
}

}  // namespace bbm
