#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "bbm/vec.hpp"

namespace bbm {

// γ_{d,p} = ∫_{S^{d-1}} |σ·e|^p dσ with e the last coordinate axis. Closed
// forms for p = 1 and for d = 1; sphere quadrature otherwise.
double gamma(int d, double p);

// Sphere-rule value of ∫ |σ·e|^p dσ for an arbitrary unit e.
double gamma_quadrature(int d, double p, int order, const Vec& e);
double gamma_quadrature(int d, double p, int order = 0);

// C_d with C_d ∫_0^∞ r^d e^{-r²} dr = 1, i.e. 2/Γ((d+1)/2).
double gaussian_norm_const(int d);

// A_d = γ_{d,1} / (2 C_d): the Gaussian pair integral n^{(d+1)/2}∫_{E^c}∫_E
// e^{-n|x-y|²} tends to A_d Per(E).
double bbm_perimeter_const(int d);

// B_d: ∫|∇W_n| tends to B_d Per(E). Calibrated once per process (or loaded
// from a cache file) on a set with known perimeter.
double degiorgi_const(int d);
// The closed form π^{d/2} the calibration is checked against.
double degiorgi_const_closed_form(int d);

enum class Provenance { ClosedForm, Quadrature, Calibrated };

struct ConstantEntry {
  double value = 0.0;
  Provenance provenance = Provenance::ClosedForm;
};

struct ConstantTable {
  int dimension = 1;
  std::map<std::string, ConstantEntry> entries;

  nlohmann::json to_json() const;
};

ConstantTable constant_table(int d);

// Cache file: {"<name>": {"<d>": value}}. Loading seeds the B_d cache so no
// calibration runs for dimensions present in the file.
void save_constants_cache(const std::string& path);
void load_constants_cache(const std::string& path);

std::string to_string(Provenance p);

}  // namespace bbm
