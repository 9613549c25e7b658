#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "bbm/field.hpp"

namespace bbm {

// M of an atom at its own location is +∞; returned as this value.
inline constexpr double kMaximalOverflow = std::numeric_limits<double>::infinity();

struct Atom {
  double location;
  double mass;
};

struct RadonMeasure1D {
  std::optional<GridField> density;  // d = 1
  std::vector<Atom> atoms;

  double mass_in(double lo, double hi) const;  // μ((lo, hi))
  double total_mass() const;
};

struct MaximalOptions {
  int radii = 256;           // log-spaced radius grid
  double refine_tol = 1e-3;  // relative change allowed when the grid doubles
  int max_radii = 4096;
  int sphere_order = 32;     // angular nodes for d = 2 ball averages
  bool check_refinement = true;
};

// Average of |f| over B(x, s).
double ball_average(const GridField& f, const Vec& x, double s, const MaximalOptions& opts = {});

// sup_{0 < s <= R} ⨍_{B(x,s)} |f|; R = +inf searches up to the grid box size.
double maximal_function(const GridField& f, const Vec& x, double R = kInfinity, const MaximalOptions& opts = {});

// sup_{0 < s <= R} μ(B(x,s)) / |B(x,s)| with open balls.
double measure_maximal(const RadonMeasure1D& mu, double x, double R = kInfinity, const MaximalOptions& opts = {});

// sup_{0 < r <= R} (1/r) ∫_0^r |∇v(x + sσ)·σ| ds
double directional_maximal(const Field& v, const Vec& sigma, const Vec& x, double R, const MaximalOptions& opts = {});

struct KernelBound {
  double lhs;    // ∫_{S^{d-1}} ∫_0^r |f(x + sσ)| ds dσ
  double rhs;    // r · M_r(f)(x)
  double ratio;  // lhs / rhs
};
KernelBound kernel_bound_check(const GridField& f, const Vec& x, double r, const MaximalOptions& opts = {});

struct Weak11Row {
  double eps;
  double measure;  // |{M f > ε}| on the grid
  double bound;    // 3^d ‖f‖₁ / ε
  bool pass() const { return measure <= bound; }
};
std::vector<Weak11Row> weak11_check(const GridField& f, const std::vector<double>& eps_ladder,
                                    const MaximalOptions& opts = {});
// The grid maximal function at every node (used by weak11_check).
std::vector<double> maximal_on_grid(const GridField& f, const MaximalOptions& opts = {});

struct SingularBound {
  double lhs;  // (1/r) ∫_{B(x,r)} |y - x|^{1-d} dμ(y)
  double rhs;  // M_r(μ)(x)
};
SingularBound singular_kernel_bound(const RadonMeasure1D& mu, double x, double r, const MaximalOptions& opts = {});
SingularBound singular_kernel_bound(const GridField& density, const Vec& x, double r, const MaximalOptions& opts = {});

// Contributions of the shells B(x, 2^{-m} r) \ B(x, 2^{-m-1} r), m < shells,
// followed by the innermost ball; they sum to the singular-kernel lhs.
std::vector<double> singular_kernel_shells(const GridField& density, const Vec& x, double r, int shells);
// |B_1| 2^d: lhs <= dyadic_constant(d) · M_r(μ)(x) by the shell decomposition.
double dyadic_constant(int d);

// Seeded nonnegative random field: node values U[0,1)^3 inside [-support, support]^d, zero elsewhere.
GridField random_grid_field(int d, int resolution, double half_width, std::uint64_t seed, double support = 1.0);

// ‖f‖₁ of the interpolant.
double l1_norm(const GridField& f);

}  // namespace bbm
