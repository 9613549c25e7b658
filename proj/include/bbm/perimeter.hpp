#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "bbm/field.hpp"
#include "bbm/nonlocal.hpp"

namespace bbm {

struct GridSpec {
  double half_width = 1.5;
  int resolution = 512;
};

enum class PerimeterMethod { Bbm, DeGiorgi };
std::string to_string(PerimeterMethod m);

struct PerimeterEstimate {
  IndicatorSet set;
  PerimeterMethod method;
  double n;
  double value;
  double exact;
  double rel_error;

  nlohmann::json to_json() const;
};

// I_{n,1}(𝟙_E) / γ_{d,1} with the Gaussian mollifier of parameter n. Equal to
// n^{(d+1)/2}∫_{E^c}∫_E e^{-n|x-y|²} / A_d since ρ_n(r)/r = C_d n^{(d+1)/2} e^{-nr²}.
double bbm_perimeter(const IndicatorSet& E, double n, const EnergyOptions& opts = {});

// W_n(x) = n^{d/2} ∫_E e^{-n|x-y|²} dy sampled on the grid.
GridField degiorgi_field(const IndicatorSet& E, double n, const GridSpec& grid);
// W_n at a single point.
double degiorgi_value(const IndicatorSet& E, double n, const Vec& x);

// ∫|∇W_n| by central differences on the grid.
double degiorgi_variation(const IndicatorSet& E, double n, const GridSpec& grid);
// degiorgi_variation / B_d
double degiorgi_perimeter(const IndicatorSet& E, double n, const GridSpec& grid);

// ∫|∂_t W_n| along the normal line of the half-space {x_d <= 0}, i.e. the
// De Giorgi variation per unit boundary area.
double degiorgi_halfspace_flux(int d, double n, int resolution);

PerimeterEstimate estimate_perimeter(const IndicatorSet& E, PerimeterMethod method, double n, const GridSpec& grid,
                                     const EnergyOptions& opts = {});

}  // namespace bbm
