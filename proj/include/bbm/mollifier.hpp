#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bbm {

enum class MollifierKind { Indicator, Gaussian, PowerLaw, Custom };

std::string to_string(MollifierKind kind);

struct RefinementPolicy {
  double rel_tol = 1e-6;
  int max_levels = 12;
};

/// Radial kernel ρ on (0, ∞) in dimension d, used as ρ(|h|) dh.
///
/// Built-in families:
///   Indicator(ε):  d ε^{-d} on (0, ε)
///   Gaussian(n):   C_d n^{(d+1)/2} r e^{-n r²}
///   PowerLaw(δ):   δ t^{δ-1} on (0, 1), optionally rescaled by (δ+d-1)/δ so
///                  that ∫ρ r^{d-1} dr = 1 also for d >= 2
/// Values are immutable after construction and safe to share across threads.
class RadialMollifier {
 public:
  static RadialMollifier indicator(int d, double eps);
  static RadialMollifier gaussian(int d, double n);
  static RadialMollifier power_law(int d, double delta, bool normalized = false);
  // support_radius may be +inf. Normalization is validated on first use.
  static RadialMollifier custom(int d, std::function<double(double)> evaluator, double support_radius);

  int dimension() const { return dim_; }
  MollifierKind kind() const { return kind_; }
  double param() const { return param_; }
  bool normalized() const { return normalized_; }

  // ρ(r); throws DomainError for r <= 0.
  double evaluate(double r) const;

  // Radius beyond which ρ vanishes (+inf for Gaussian).
  double support_radius() const;
  // Radius the radial rule integrates to. For Gaussian this is the truncation
  // point with relative tail mass below 1e-14.
  double quadrature_radius() const;
  // Axiom (rho-4): ρ(r) = 0 for r > 1.
  bool vanishes_beyond_one() const { return support_radius() <= 1.0; }

  // ∫_0^∞ ρ(r) r^{d-1} dr by level-doubling radial quadrature.
  // Refined until two successive levels agree to 1e-12 by default, which
  // keeps built-in kernels within 1e-10 of unit mass.
  double normalization(const RefinementPolicy& policy = {1e-12, 14}) const;
  double tail_mass(double cut, const RefinementPolicy& policy = {}) const;
  bool is_nonincreasing(int probes) const;

  // Nodes r_i and measure weights w_i ≈ ρ(r_i) r_i^{d-1} dr on 2^level
  // composite Gauss-Legendre panels, after the family's change of variables
  // (PowerLaw: s = r^δ; infinite custom support: r = t/(1-t)).
  struct Nodes {
    std::vector<double> r;
    std::vector<double> w;
  };
  // Radii in `cuts` become extra panel breakpoints (kinks or jumps of the
  // integrand at known distances).
  Nodes measure_nodes(int level, int order = 8, const std::vector<double>& cuts = {}) const;

  // ∫_0^R ρ(r) r^{d-1} g(r) dr on the rule of the given level, where R is the
  // quadrature radius. Used by normalization and the radial rule.
  double integrate(const std::function<double(double)>& g, int level) const;

  // Throws IntegrationError if a custom kernel fails normalization.
  void validate() const;

  std::string label() const;
  nlohmann::json to_json() const;
  static RadialMollifier from_json(const nlohmann::json& j);

 private:
  RadialMollifier() = default;

  struct CustomState;

  int dim_ = 1;
  MollifierKind kind_ = MollifierKind::Indicator;
  double param_ = 0.0;
  bool normalized_ = true;
  double scale_ = 1.0;  // multiplicative factor (C_d n^{(d+1)/2}, d ε^{-d}, ...)
  double truncation_ = 0.0;
  std::shared_ptr<CustomState> custom_;
};

// Truncation point R with ∫_R^∞ ρ r^{d-1} / ∫_0^∞ ρ r^{d-1} < rel_tail for
// the Gaussian family, from the closed-form tail of s^d e^{-s²}.
double gaussian_truncation(int d, double n, double rel_tail = 1e-14);

}  // namespace bbm
