#pragma once

#include <functional>
#include <optional>

#include "bbm/convergence.hpp"
#include "bbm/field.hpp"
#include "bbm/mollifier.hpp"
#include "bbm/quadrature.hpp"

namespace bbm {

using VectorField = std::function<Vec(const Vec&)>;

// D(x) = ∫ |u(x) - u(y)|^p / |x - y|^p ρ(|x - y|) dy
double pointwise_density(const Field& u, const RadialMollifier& m, double p, const Vec& x,
                         const QuadratureOptions& quad = {});

// ∫ |u(x+h) - u(x) - ∇u(x)·h|^p / |h|^p ρ(|h|) dh, with ∇^{ac} for BV fields.
double remainder_density(const Field& u, const RadialMollifier& m, double p, const Vec& x,
                         const QuadratureOptions& quad = {});

// Density restricted to y ∈ Ω; x must lie in Ω.
double domain_density(const Field& u, const RadialMollifier& m, double p, const Vec& x, const IndicatorSet& omega,
                      const QuadratureOptions& quad = {});

struct EnergyOptions {
  int resolution = 0;  // panels per axis; 0: 4096 (d=1), 256 (d=2), 64 (d=3)
  int x_order = 2;     // Gauss points per panel (d=1)
  QuadratureOptions quad{};

  int resolved_resolution(int d) const;
};

// I(u) = ∫ D(x) dx over the field's variation box enlarged by the kernel radius.
double energy(const Field& u, const RadialMollifier& m, double p, const EnergyOptions& opts = {});

// ∫∫ |u(x+h) - u(x) - U(x)·h| / |h| ρ(|h|) dh dx
double sobolev_residual(const Field& u, const RadialMollifier& m, const VectorField& U, const EnergyOptions& opts = {});

// ∫ remainder_density(x, p = 1) dx
double remainder_mass(const Field& u, const RadialMollifier& m, const EnergyOptions& opts = {});

// γ_{d,p} ∫ |∇u|^p. BV fields at p = 1 add γ_{1,1} Σ|jumps|; indicator sets
// give γ_{d,1} Per(E). `region` (bounded) restricts the integral.
double local_energy(const Field& u, double p, const std::optional<IndicatorSet>& region = std::nullopt,
                    int resolution = 0);

ConvergenceReport bv_pointwise_limit(const BVField1D& u, const MollifierLadder& ladder, double probe,
                                     const QuadratureOptions& quad = {});

ConvergenceReport ponce_spector_mass(const BVField1D& u, const MollifierLadder& ladder, const EnergyOptions& opts = {});

}  // namespace bbm
