#include "bbm/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bbm/constants.hpp"
#include "bbm/error.hpp"
#include "bbm/gauss.hpp"
#include "bbm/parallel.hpp"

namespace bbm {

namespace {

enum class Mode { Density, Remainder, Residual };

inline double pow_p(double a, double p) {
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  return std::pow(a, p);
}

void check_common(const Field& u, const RadialMollifier& m, double p) {
  if (dimension(u) != m.dimension()) {
    throw DomainError("field dimension " + std::to_string(dimension(u)) + " does not match mollifier dimension " +
                      std::to_string(m.dimension()));
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be a finite real >= 1");
}

void check_gradient(const Field& u) {
  if (std::holds_alternative<IndicatorSet>(u)) throw UnsupportedError("remainder needs a gradient; indicator sets have none");
  if (!has_gradient(u)) throw UnsupportedError("field '" + describe(u) + "' has no gradient");
}

void check_probe(const Field& u, const RadialMollifier& m, const Vec& x) {
  const auto* g = std::get_if<GridField>(&u);
  if (!g) return;
  const double r = m.quadrature_radius();
  const double lo = -g->half_width();
  const double hi = g->node_coord(g->resolution() - 1);
  for (int a = 0; a < g->dim(); ++a) {
    if (x[a] - r < lo || x[a] + r > hi) {
      std::ostringstream msg;
      msg << "probe coordinate " << x[a] << " with kernel radius " << r << " leaves the grid box [" << lo << ", "
          << hi << "]";
      throw ValidityError(msg.str());
    }
  }
}

struct Kernel {
  const Field& u;
  double p;
  Mode mode;
  SphereRule sphere;
  RadialRule radial;
  const IndicatorSet* mask = nullptr;
  const VectorField* U = nullptr;
  bool has_grad;
  const RadialMollifier& mollifier;
  QuadratureOptions options;
  std::vector<double> breaks;  // d = 1: known discontinuities of u

  Kernel(const Field& field, const RadialMollifier& m, double power, Mode md, const QuadratureOptions& quad)
      : u(field),
        p(power),
        mode(md),
        sphere(sphere_rule(m.dimension(), quad.resolved_sphere_order(m.dimension()))),
        radial(radial_rule(m, quad.radial_level, quad.panel_order)),
        has_grad(has_gradient(field)),
        mollifier(m),
        options(quad) {
    if (m.dimension() == 1) breaks = breakpoints_1d(field);
  }

  // In 1D a jump of u (or an edge of the mask) at distance c from x makes the
  // radial integrand discontinuous at r = c; split the panels there.
  RadialRule radial_for(const Vec& x) const {
    if (mollifier.dimension() != 1) return radial;
    std::vector<double> cuts;
    auto add = [&](double b) {
      const double c = std::abs(b - x[0]);
      if (c > 0.0 && c < radial.r_max) cuts.push_back(c);
    };
    for (double b : breaks) add(b);
    if (mask) {
      if (const auto* iv = std::get_if<Interval>(&mask->shape())) {
        add(iv->a);
        add(iv->b);
      }
    }
    if (cuts.empty()) return radial;
    return radial_rule(mollifier, options.radial_level, options.panel_order, cuts);
  }

  double at(const Vec& x) const {
    const RadialRule radial = radial_for(x);
    Vec g{0.0, 0.0, 0.0};
    if (mode == Mode::Remainder || (mode == Mode::Density && has_grad)) g = gradient(u, x);
    if (mode == Mode::Residual) g = (*U)(x);
    // for small r the angular integrand has a kink where σ ⟂ g
    const SphereRule local = align_pole(sphere, g);
    if (mode == Mode::Density) g = Vec{0.0, 0.0, 0.0};
    double total = 0.0;
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
      const double r = radial.nodes[i];
      double shell = 0.0;
      for (std::size_t j = 0; j < local.nodes.size(); ++j) {
        const Vec& s = local.nodes[j];
        const Vec h = r * s;
        if (mask && !mask->contains(x + h)) continue;
        double du = increment(u, x, h);
        if (mode != Mode::Density) du -= r * dot(g, s);
        const double v = pow_p(std::abs(du) / r, p);
        if (std::isnan(v)) {
          std::ostringstream msg;
          msg << "integrand is NaN at r = " << r << ", sigma = (" << s[0] << ", " << s[1] << ", " << s[2] << ")";
          throw EvaluationError(msg.str());
        }
        shell += local.weights[j] * v;
      }
      total += radial.weights[i] * shell;
    }
    return total;
  }
};

// Integration box for x: variation box of u enlarged by the kernel radius.
void integration_box(const Field& u, double r_max, Vec& lo, Vec& hi) {
  if (!support_bounds(u, lo, hi)) {
    throw ValidityError("field '" + describe(u) + "' has unbounded support; energy-type integrals need a bounded box");
  }
  for (int a = 0; a < dimension(u); ++a) {
    lo[a] -= r_max;
    hi[a] += r_max;
  }
}

// ∫ dx ∫ ρ(|h|) g(x, h) dh in d = 1, radial-outer: for each radial node the
// x-integral runs over panels cut at the field's breakpoints and their shifts.
double integrate_1d(const Field& u, const RadialMollifier& m, double p, Mode mode, const VectorField* U,
                    const EnergyOptions& opts) {
  const RadialRule radial = radial_rule(m, opts.quad.radial_level, opts.quad.panel_order);
  Vec lo, hi;
  integration_box(u, radial.r_max, lo, hi);
  const double a = lo[0], b = hi[0];
  if (!(b > a)) return 0.0;
  const int N = opts.resolved_resolution(1);
  const std::vector<double> breaks = breakpoints_1d(u);
  const GaussRule& gl = gauss_legendre(opts.x_order);

  const std::size_t nodes = radial.nodes.size();
  return ordered_sum(2 * nodes, [&](std::size_t idx) {
    const std::size_t i = idx / 2;
    const double r = radial.nodes[i];
    const double h = (idx % 2 == 0) ? -r : r;
    std::vector<double> cuts;
    cuts.reserve(N + 1 + 2 * breaks.size());
    for (int k = 0; k <= N; ++k) cuts.push_back(a + (b - a) * k / N);
    for (double c : breaks) {
      for (double t : {c, c - h}) {
        if (t > a && t < b) cuts.push_back(t);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double half = 0.5 * (cuts[k + 1] - cuts[k]);
      if (half <= 0.0) continue;
      const double mid = 0.5 * (cuts[k + 1] + cuts[k]);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const Vec x{mid + half * gl.nodes[q], 0.0, 0.0};
        double du = increment(u, x, Vec{h, 0.0, 0.0});
        if (mode == Mode::Remainder) du -= gradient(u, x)[0] * h;
        if (mode == Mode::Residual) du -= (*U)(x)[0] * h;
        sum += half * gl.weights[q] * pow_p(std::abs(du) / r, p);
      }
    }
    if (std::isnan(sum)) throw EvaluationError("energy integrand is NaN at r = " + std::to_string(r));
    return radial.weights[i] * sum;
  });
}

// Midpoint tensor grid over the integration box, D(x) per cell center.
double integrate_tensor(const Field& u, const RadialMollifier& m, double p, Mode mode, const VectorField* U,
                        const EnergyOptions& opts) {
  const int d = dimension(u);
  Kernel kernel(u, m, p, mode, opts.quad);
  kernel.U = U;
  Vec lo, hi;
  integration_box(u, kernel.radial.r_max, lo, hi);
  const int N = opts.resolved_resolution(d);
  Vec step{0.0, 0.0, 0.0};
  double cell = 1.0;
  for (int a = 0; a < d; ++a) {
    step[a] = (hi[a] - lo[a]) / N;
    cell *= step[a];
  }
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(N);
  return cell * ordered_sum(total, [&](std::size_t flat) {
    Vec x{0.0, 0.0, 0.0};
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      x[a] = lo[a] + (static_cast<double>(rem % N) + 0.5) * step[a];
      rem /= N;
    }
    return kernel.at(x);
  });
}

double energy_type(const Field& u, const RadialMollifier& m, double p, Mode mode, const VectorField* U,
                   const EnergyOptions& opts) {
  if (dimension(u) == 1) return integrate_1d(u, m, p, mode, U, opts);
  return integrate_tensor(u, m, p, mode, U, opts);
}

}  // namespace

int EnergyOptions::resolved_resolution(int d) const {
  if (resolution > 0) return resolution;
  return d == 1 ? 4096 : d == 2 ? 256 : 64;
}

double pointwise_density(const Field& u, const RadialMollifier& m, double p, const Vec& x,
                         const QuadratureOptions& quad) {
  check_common(u, m, p);
  check_probe(u, m, x);
  return Kernel(u, m, p, Mode::Density, quad).at(x);
}

double remainder_density(const Field& u, const RadialMollifier& m, double p, const Vec& x,
                         const QuadratureOptions& quad) {
  check_common(u, m, p);
  check_gradient(u);
  check_probe(u, m, x);
  return Kernel(u, m, p, Mode::Remainder, quad).at(x);
}

double domain_density(const Field& u, const RadialMollifier& m, double p, const Vec& x, const IndicatorSet& omega,
                      const QuadratureOptions& quad) {
  check_common(u, m, p);
  if (omega.dim() != dimension(u)) throw DomainError("domain dimension does not match the field");
  if (!omega.contains(x)) throw DomainError("probe lies outside the domain");
  check_probe(u, m, x);
  Kernel kernel(u, m, p, Mode::Density, quad);
  kernel.mask = &omega;
  return kernel.at(x);
}

double energy(const Field& u, const RadialMollifier& m, double p, const EnergyOptions& opts) {
  check_common(u, m, p);
  return energy_type(u, m, p, Mode::Density, nullptr, opts);
}

double sobolev_residual(const Field& u, const RadialMollifier& m, const VectorField& U, const EnergyOptions& opts) {
  check_common(u, m, 1.0);
  if (!U) throw DomainError("sobolev_residual needs a candidate gradient");
  return energy_type(u, m, 1.0, Mode::Residual, &U, opts);
}

double remainder_mass(const Field& u, const RadialMollifier& m, const EnergyOptions& opts) {
  check_common(u, m, 1.0);
  check_gradient(u);
  return energy_type(u, m, 1.0, Mode::Remainder, nullptr, opts);
}

double local_energy(const Field& u, double p, const std::optional<IndicatorSet>& region, int resolution) {
  if (!(p >= 1.0)) throw DomainError("p must be >= 1");
  const int d = dimension(u);
  const double g = gamma(d, p);
  if (region && (!region->bounded() || region->dim() != d)) throw DomainError("local_energy region must be bounded and match d");

  if (const auto* set = std::get_if<IndicatorSet>(&u)) {
    if (p > 1.0 && !set->empty()) return kInfinity;
    return g * set->exact_perimeter();
  }

  if (const auto* grid = std::get_if<GridField>(&u)) {
    const int N = grid->resolution();
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(N);
    const double cell = std::pow(grid->spacing(), d);
    double sum = 0.0;
    int idx[3] = {0, 0, 0};
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (int a = d - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rem % N);
        rem /= N;
      }
      const std::span<const int> ix(idx, d);
      if (region && !region->contains(grid->node(ix))) continue;
      sum += pow_p(norm(grid->node_gradient(ix)), p);
    }
    return g * sum * cell;
  }

  const AnalyticField* smooth = nullptr;
  const BVField1D* bv = std::get_if<BVField1D>(&u);
  smooth = bv ? &bv->smooth : &std::get<AnalyticField>(u);
  if (!smooth->gradient) throw UnsupportedError("local_energy needs a gradient oracle");

  double jump_part = 0.0;
  if (bv) {
    for (const Jump& j : bv->jumps) {
      if (region && !region->contains(Vec{j.location, 0.0, 0.0})) continue;
      if (p > 1.0) return kInfinity;
      jump_part += std::abs(j.height);
    }
  }

  Vec lo, hi;
  if (region) {
    region->bounds(lo, hi);
  } else {
    if (!std::isfinite(smooth->support_radius)) {
      throw ValidityError("local_energy of an unbounded field needs a bounded region");
    }
    for (int a = 0; a < d; ++a) {
      lo[a] = -smooth->support_radius;
      hi[a] = smooth->support_radius;
    }
  }
  const int N = resolution > 0 ? resolution : (d == 1 ? 4096 : d == 2 ? 256 : 64);
  std::vector<double> nodes[3], weights[3];
  for (int a = 0; a < d; ++a) append_composite_gl(lo[a], hi[a], N, 2, nodes[a], weights[a]);
  const std::size_t per_axis = nodes[0].size();
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= per_axis;
  const double ac = ordered_sum(total, [&](std::size_t flat) {
    Vec x{0.0, 0.0, 0.0};
    double w = 1.0;
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      const std::size_t k = rem % per_axis;
      rem /= per_axis;
      x[a] = nodes[a][k];
      w *= weights[a][k];
    }
    if (region && !region->contains(x)) return 0.0;
    return w * pow_p(norm(smooth->gradient(x)), p);
  });
  return g * (ac + jump_part);
}

ConvergenceReport bv_pointwise_limit(const BVField1D& u, const MollifierLadder& ladder, double probe,
                                     const QuadratureOptions& quad) {
  for (const Jump& j : u.jumps) {
    if (j.location == probe) throw ProbeError("probe sits on a jump location");
  }
  if (ladder.dimension != 1) throw DomainError("BV ladder must be one-dimensional");
  const Field f = u;
  const Vec x{probe, 0.0, 0.0};
  const double limit = gamma(1, 1.0) * std::abs(u.smooth.gradient ? u.smooth.gradient(x)[0] : 0.0);
  return convergence_study(
      "bv_pointwise_limit", [&](const RadialMollifier& m) { return pointwise_density(f, m, 1.0, x, quad); }, ladder,
      limit);
}

ConvergenceReport ponce_spector_mass(const BVField1D& u, const MollifierLadder& ladder, const EnergyOptions& opts) {
  if (ladder.dimension != 1) throw DomainError("BV ladder must be one-dimensional");
  const Field f = u;
  const double limit = gamma(1, 1.0) * u.singular_mass();
  return convergence_study(
      "ponce_spector_mass", [&](const RadialMollifier& m) { return remainder_mass(f, m, opts); }, ladder, limit);
}

}  // namespace bbm
