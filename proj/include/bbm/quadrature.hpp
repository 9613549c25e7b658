#pragma once

#include <functional>
#include <vector>

#include "bbm/mollifier.hpp"
#include "bbm/vec.hpp"

namespace bbm {

/// Product rule on S^{d-1}. Weights sum to |S^{d-1}|.
///
/// d=1: {-1, +1}, unit weights.
/// d=2: composite Gauss-Legendre in the angle over the four quadrants
///      (order rounded up to a multiple of 4).
/// d=3: Gauss-Legendre in the polar angle, split at the equator (order nodes,
///      weight sinθ) × composite Gauss-Legendre azimuth over four quadrants
///      (2·order nodes).
/// Panel breakpoints sit on the coordinate planes, so integrands with kinks
/// where σ is orthogonal to a coordinate axis are integrated to full order.
struct SphereRule {
  int dim = 1;
  std::vector<Vec> nodes;
  std::vector<double> weights;
};

SphereRule sphere_rule(int d, int order);

// Reflects the rule so the last coordinate axis maps onto `axis` (d >= 2).
// Kinks of |σ·axis| then fall on panel boundaries. Zero axis: unchanged.
SphereRule align_pole(const SphereRule& rule, const Vec& axis);

// |S^{d-1}|: 2, 2π, 4π.
double sphere_area(int d);

/// Radial nodes and weights w_i ≈ ρ(r_i) r_i^{d-1} dr (measure weights; the
/// mollifier's change of variables is already folded in).
struct RadialRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double r_max = 0.0;
};

RadialRule radial_rule(const RadialMollifier& m, int level, int panel_order = 8, const std::vector<double>& cuts = {});

struct QuadratureOptions {
  int sphere_order = 0;  // 0: per-dimension default (64 for d=2, 32 for d=3)
  int radial_level = 4;
  int panel_order = 8;
  RefinementPolicy refinement{};

  int resolved_sphere_order(int d) const;
};

// Σ_r w_r Σ_σ w_σ F(r, σ). Throws EvaluationError when F returns NaN.
double integrate_polar(const SphereRule& sphere, const RadialRule& radial,
                       const std::function<double(double, const Vec&)>& F);

}  // namespace bbm
