#include "bbm/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bbm/error.hpp"
#include "bbm/gauss.hpp"

namespace bbm {

namespace {
constexpr double kPi = std::numbers::pi;
}

double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi;
    case 3: return 4.0 * kPi;
    default: throw UnsupportedError("sphere_area: unsupported dimension");
  }
}

SphereRule align_pole(const SphereRule& rule, const Vec& axis) {
  const int d = rule.dim;
  const double len = norm(axis);
  if (d < 2 || !(len > 0.0)) return rule;
  // Householder: H = I - 2vv^T/|v|², v = e_d - a, so H e_d = a
  Vec v = (-1.0 / len) * axis;
  v[d - 1] += 1.0;
  const double vv = dot(v, v);
  if (vv < 1e-30) return rule;
  SphereRule out = rule;
  for (Vec& s : out.nodes) s = s - (2.0 * dot(v, s) / vv) * v;
  return out;
}

SphereRule sphere_rule(int d, int order) {
  if (order < 1) throw DomainError("sphere_rule: order must be >= 1");
  SphereRule rule;
  rule.dim = d;
  if (d == 1) {
    rule.nodes = {Vec{-1.0, 0.0, 0.0}, Vec{1.0, 0.0, 0.0}};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  if (d == 2) {
    const int per_quadrant = std::max(1, (order + 3) / 4);
    std::vector<double> phi, w;
    append_composite_gl(0.0, 2.0 * kPi, 4, per_quadrant, phi, w);
    for (std::size_t i = 0; i < phi.size(); ++i) {
      rule.nodes.push_back(Vec{std::cos(phi[i]), std::sin(phi[i]), 0.0});
      rule.weights.push_back(w[i]);
    }
    return rule;
  }
  if (d == 3) {
    const int per_hemisphere = std::max(1, (order + 1) / 2);
    const int per_quadrant = std::max(1, (2 * order + 3) / 4);
    std::vector<double> theta, wt, phi, wp;
    append_composite_gl(0.0, kPi, 2, per_hemisphere, theta, wt);
    append_composite_gl(0.0, 2.0 * kPi, 4, per_quadrant, phi, wp);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double st = std::sin(theta[i]);
      const double ct = std::cos(theta[i]);
      for (std::size_t j = 0; j < phi.size(); ++j) {
        rule.nodes.push_back(Vec{st * std::cos(phi[j]), st * std::sin(phi[j]), ct});
        rule.weights.push_back(wt[i] * st * wp[j]);
      }
    }
    return rule;
  }
  throw UnsupportedError("sphere_rule: dimension must be 1, 2 or 3");
}

RadialRule radial_rule(const RadialMollifier& m, int level, int panel_order, const std::vector<double>& cuts) {
  m.validate();
  RadialMollifier::Nodes n = m.measure_nodes(level, panel_order, cuts);
  for (std::size_t i = 0; i < n.w.size(); ++i) {
    if (!std::isfinite(n.w[i]) || n.w[i] < 0.0) {
      throw IntegrationError("radial_rule: unresolvable kernel value at r = " + std::to_string(n.r[i]));
    }
  }
  return RadialRule{std::move(n.r), std::move(n.w), m.quadrature_radius()};
}

int QuadratureOptions::resolved_sphere_order(int d) const {
  if (sphere_order > 0) return sphere_order;
  return d == 3 ? 32 : 64;
}

double integrate_polar(const SphereRule& sphere, const RadialRule& radial,
                       const std::function<double(double, const Vec&)>& F) {
  double total = 0.0;
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double r = radial.nodes[i];
    double shell = 0.0;
    for (std::size_t j = 0; j < sphere.nodes.size(); ++j) {
      const double v = F(r, sphere.nodes[j]);
      if (std::isnan(v)) {
        std::ostringstream msg;
        const Vec& s = sphere.nodes[j];
        msg << "integrand is NaN at r = " << r << ", sigma = (" << s[0] << ", " << s[1] << ", " << s[2] << ")";
        throw EvaluationError(msg.str());
      }
      shell += sphere.weights[j] * v;
    }
    total += radial.weights[i] * shell;
  }
  return total;
}

}  // namespace bbm
