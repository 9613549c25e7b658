#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bbm/vec.hpp"

namespace bbm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Closed-form scalar field on R^d. `support_radius` bounds the support
/// (centered at the origin) for integrals over x; +inf means not compactly
/// supported.
struct AnalyticField {
  int dim = 1;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // optional
  // optional exact u(x+h) - u(x); avoids cancellation for tiny |h|
  std::function<double(const Vec&, const Vec&)> increment;
  double support_radius = kInfinity;
  std::string name = "analytic";
};

/// Samples on nodes x_i = -L + i·h, h = 2L/N, i = 0..N-1 per axis, stored
/// row-major with axis 0 slowest. Multilinear interpolation between nodes,
/// zero outside the node box.
class GridField {
 public:
  GridField(int dim, double half_width, int resolution, std::vector<double> values);

  static GridField sample(int dim, double half_width, int resolution, const std::function<double(const Vec&)>& f);

  int dim() const { return dim_; }
  double half_width() const { return L_; }
  int resolution() const { return N_; }
  double spacing() const { return h_; }
  const std::vector<double>& values() const { return values_; }

  double node_coord(int i) const { return -L_ + i * h_; }
  Vec node(std::span<const int> idx) const;
  std::size_t flat_index(std::span<const int> idx) const;
  double at(std::span<const int> idx) const { return values_[flat_index(idx)]; }

  double eval(const Vec& x) const;
  // Central differences at interior nodes, one-sided at the edges,
  // multilinearly interpolated to x.
  Vec gradient(const Vec& x) const;
  Vec node_gradient(std::span<const int> idx) const;
  bool inside(const Vec& x) const;

  // Little-endian header (d, N as uint64, L as float64) then row-major float64.
  void save(const std::string& path) const;
  static GridField load(const std::string& path);

 private:
  int dim_;
  double L_;
  int N_;
  double h_;
  std::vector<double> values_;
};

struct Jump {
  double location;
  double height;
};

/// 1D BV function: smooth part plus jumps. At a jump location the value is
/// the average of the one-sided limits.
struct BVField1D {
  AnalyticField smooth;
  std::vector<Jump> jumps;  // strictly increasing locations

  BVField1D(AnalyticField smooth_part, std::vector<Jump> jump_list);
  double singular_mass() const;
};

struct Interval {
  double a, b;
};
struct Ball {
  Vec center;
  double radius;
};
struct Box {
  Vec lo, hi;
};
struct HalfSpace {
  Vec normal;  // unit
  double offset;  // set is {x : normal·x <= offset}
};

class IndicatorSet {
 public:
  using Shape = std::variant<Interval, Ball, Box, HalfSpace>;

  IndicatorSet(int dim, Shape shape);

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }
  bool contains(const Vec& x) const;
  double exact_volume() const;
  double exact_perimeter() const;
  bool bounded() const;
  bool empty() const;
  // Axis-aligned bounding box; infinite extents for half-spaces.
  void bounds(Vec& lo, Vec& hi) const;
  std::string describe() const;

 private:
  int dim_;
  Shape shape_;
};

using Field = std::variant<AnalyticField, GridField, BVField1D, IndicatorSet>;

int dimension(const Field& f);
double eval(const Field& f, const Vec& x);
// Checked entry point: x.size() must equal the field dimension.
double eval(const Field& f, std::span<const double> x);
bool has_gradient(const Field& f);
// Analytic gradient, grid central differences, or ∇^{ac} for BV fields.
Vec gradient(const Field& f, const Vec& x);
double increment(const Field& f, const Vec& x, const Vec& h);
// Axis-aligned box containing the support; false when unbounded.
bool support_bounds(const Field& f, Vec& lo, Vec& hi);
// Known discontinuity locations of a 1D field (jumps, interval endpoints).
std::vector<double> breakpoints_1d(const Field& f);
std::string describe(const Field& f);

// Factories.
AnalyticField linear_field(int dim, const Vec& V);
AnalyticField constant_field(int dim, double c);
// e^{-|x|²}; treated as supported in |x| <= support (value there e^{-36}).
AnalyticField gaussian_bump(int dim, double support = 6.0);
AnalyticField quadratic_1d();  // x²
BVField1D step_field(double a, double b, double height = 1.0);  // height·𝟙_[a,b]

/// u * χ_k on the grid, χ_k(y) ∝ (1 - |k y|²)² on |y| < 1/k, with the discrete
/// stencil normalized to unit mass. Throws ValidityError if h > 1/(4k).
GridField mollify(const Field& f, int k, double half_width, int resolution);

}  // namespace bbm
