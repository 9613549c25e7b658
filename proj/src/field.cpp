#include "bbm/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bbm/error.hpp"

namespace bbm {

namespace {

template <class T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }
}

double ball_volume(int d, double r) {
  switch (d) {
    case 1: return 2.0 * r;
    case 2: return std::numbers::pi * r * r;
    default: return 4.0 / 3.0 * std::numbers::pi * r * r * r;
  }
}

}  // namespace

// ---------------------------------------------------------------- GridField

GridField::GridField(int dim, double half_width, int resolution, std::vector<double> values)
    : dim_(dim), L_(half_width), N_(resolution), h_(2.0 * half_width / resolution), values_(std::move(values)) {
  if (dim < 1 || dim > 3) throw UnsupportedError("grid field dimension must be 1, 2 or 3");
  if (!(half_width > 0.0) || resolution < 2) throw DomainError("grid field needs L > 0 and N >= 2");
  std::size_t expected = 1;
  for (int a = 0; a < dim; ++a) expected *= static_cast<std::size_t>(resolution);
  if (values_.size() != expected) throw DomainError("grid field value count does not match N^d");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("grid field values must be finite");
  }
}

GridField GridField::sample(int dim, double half_width, int resolution, const std::function<double(const Vec&)>& f) {
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(resolution);
  std::vector<double> values(total);
  const double h = 2.0 * half_width / resolution;
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vec x{0.0, 0.0, 0.0};
    std::size_t rem = flat;
    for (int a = dim - 1; a >= 0; --a) {
      x[a] = -half_width + static_cast<double>(rem % resolution) * h;
      rem /= resolution;
    }
    values[flat] = f(x);
  }
  return GridField(dim, half_width, resolution, std::move(values));
}

Vec GridField::node(std::span<const int> idx) const {
  Vec x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = node_coord(idx[a]);
  return x;
}

std::size_t GridField::flat_index(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * N_ + static_cast<std::size_t>(idx[a]);
  return flat;
}

bool GridField::inside(const Vec& x) const {
  for (int a = 0; a < dim_; ++a) {
    if (x[a] < -L_ || x[a] > -L_ + (N_ - 1) * h_) return false;
  }
  return true;
}

namespace {

// Cell index and fraction per axis; false when outside the node box.
bool locate(const GridField& g, const Vec& x, int* cell, double* frac) {
  const int N = g.resolution();
  for (int a = 0; a < g.dim(); ++a) {
    const double t = (x[a] + g.half_width()) / g.spacing();
    if (!(t >= 0.0) || t > N - 1) return false;
    int i = static_cast<int>(std::floor(t));
    if (i >= N - 1) i = N - 2;
    cell[a] = i;
    frac[a] = t - i;
  }
  return true;
}

}  // namespace

double GridField::eval(const Vec& x) const {
  int cell[3];
  double frac[3];
  if (!locate(*this, x, cell, frac)) return 0.0;
  double sum = 0.0;
  int idx[3];
  for (int corner = 0; corner < (1 << dim_); ++corner) {
    double w = 1.0;
    for (int a = 0; a < dim_; ++a) {
      const int bit = (corner >> a) & 1;
      idx[a] = cell[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w != 0.0) sum += w * values_[flat_index(std::span<const int>(idx, dim_))];
  }
  return sum;
}

Vec GridField::node_gradient(std::span<const int> idx) const {
  Vec g{0.0, 0.0, 0.0};
  int nb[3];
  for (int a = 0; a < dim_; ++a) {
    std::copy(idx.begin(), idx.end(), nb);
    const int i = idx[a];
    double hi_v, lo_v, span;
    if (i == 0) {
      nb[a] = 1;
      hi_v = values_[flat_index(std::span<const int>(nb, dim_))];
      lo_v = at(idx);
      span = h_;
    } else if (i == N_ - 1) {
      hi_v = at(idx);
      nb[a] = N_ - 2;
      lo_v = values_[flat_index(std::span<const int>(nb, dim_))];
      span = h_;
    } else {
      nb[a] = i + 1;
      hi_v = values_[flat_index(std::span<const int>(nb, dim_))];
      nb[a] = i - 1;
      lo_v = values_[flat_index(std::span<const int>(nb, dim_))];
      span = 2.0 * h_;
    }
    g[a] = (hi_v - lo_v) / span;
  }
  return g;
}

Vec GridField::gradient(const Vec& x) const {
  int cell[3];
  double frac[3];
  Vec out{0.0, 0.0, 0.0};
  if (!locate(*this, x, cell, frac)) return out;
  int idx[3];
  for (int corner = 0; corner < (1 << dim_); ++corner) {
    double w = 1.0;
    for (int a = 0; a < dim_; ++a) {
      const int bit = (corner >> a) & 1;
      idx[a] = cell[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w == 0.0) continue;
    const Vec g = node_gradient(std::span<const int>(idx, dim_));
    for (int a = 0; a < dim_; ++a) out[a] += w * g[a];
  }
  return out;
}

void GridField::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const std::uint64_t d = to_little_endian<std::uint64_t>(dim_);
  const std::uint64_t n = to_little_endian<std::uint64_t>(N_);
  const double L = to_little_endian(L_);
  out.write(reinterpret_cast<const char*>(&d), 8);
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&L), 8);
  for (double v : values_) {
    const double le = to_little_endian(v);
    out.write(reinterpret_cast<const char*>(&le), 8);
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

GridField GridField::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::uint64_t d = 0, n = 0;
  double L = 0.0;
  in.read(reinterpret_cast<char*>(&d), 8);
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&L), 8);
  if (!in) throw DomainError("truncated grid field header in '" + path + "'");
  d = to_little_endian(d);
  n = to_little_endian(n);
  L = to_little_endian(L);
  if (d < 1 || d > 3 || n < 2 || n > (1u << 20)) throw DomainError("invalid grid field header in '" + path + "'");
  std::size_t total = 1;
  for (std::uint64_t a = 0; a < d; ++a) total *= n;
  std::vector<double> values(total);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(total * 8));
  if (!in) throw DomainError("truncated grid field data in '" + path + "'");
  for (double& v : values) v = to_little_endian(v);
  return GridField(static_cast<int>(d), L, static_cast<int>(n), std::move(values));
}

// ---------------------------------------------------------------- BVField1D

BVField1D::BVField1D(AnalyticField smooth_part, std::vector<Jump> jump_list)
    : smooth(std::move(smooth_part)), jumps(std::move(jump_list)) {
  if (smooth.dim != 1) throw DomainError("BV field smooth part must be one-dimensional");
  for (std::size_t i = 1; i < jumps.size(); ++i) {
    if (!(jumps[i].location > jumps[i - 1].location)) throw DomainError("BV jump locations must be strictly increasing");
  }
}

double BVField1D::singular_mass() const {
  double m = 0.0;
  for (const Jump& j : jumps) m += std::abs(j.height);
  return m;
}

// ------------------------------------------------------------- IndicatorSet

IndicatorSet::IndicatorSet(int dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {
  if (dim < 1 || dim > 3) throw UnsupportedError("indicator set dimension must be 1, 2 or 3");
  if (auto* iv = std::get_if<Interval>(&shape_)) {
    if (dim != 1) throw DomainError("Interval requires d = 1");
    if (iv->b < iv->a) throw DomainError("Interval needs a <= b");
  } else if (auto* ball = std::get_if<Ball>(&shape_)) {
    if (!(ball->radius > 0.0)) throw DomainError("Ball needs a positive radius");
  } else if (auto* box = std::get_if<Box>(&shape_)) {
    for (int a = 0; a < dim; ++a) {
      if (box->hi[a] < box->lo[a]) throw DomainError("Box needs lo <= hi");
    }
  } else if (auto* hs = std::get_if<HalfSpace>(&shape_)) {
    double n2 = 0.0;
    for (int a = 0; a < dim; ++a) n2 += hs->normal[a] * hs->normal[a];
    if (!(n2 > 0.0)) throw DomainError("HalfSpace needs a nonzero normal");
    const double n = std::sqrt(n2);
    for (int a = 0; a < dim; ++a) hs->normal[a] /= n;
    hs->offset /= n;
  }
}

bool IndicatorSet::contains(const Vec& x) const {
  if (auto* iv = std::get_if<Interval>(&shape_)) return x[0] >= iv->a && x[0] <= iv->b;
  if (auto* ball = std::get_if<Ball>(&shape_)) {
    double r2 = 0.0;
    for (int a = 0; a < dim_; ++a) r2 += (x[a] - ball->center[a]) * (x[a] - ball->center[a]);
    return r2 <= ball->radius * ball->radius;
  }
  if (auto* box = std::get_if<Box>(&shape_)) {
    for (int a = 0; a < dim_; ++a) {
      if (x[a] < box->lo[a] || x[a] > box->hi[a]) return false;
    }
    return true;
  }
  const auto& hs = std::get<HalfSpace>(shape_);
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) s += hs.normal[a] * x[a];
  return s <= hs.offset;
}

double IndicatorSet::exact_volume() const {
  if (auto* iv = std::get_if<Interval>(&shape_)) return iv->b - iv->a;
  if (auto* ball = std::get_if<Ball>(&shape_)) return ball_volume(dim_, ball->radius);
  if (auto* box = std::get_if<Box>(&shape_)) {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= box->hi[a] - box->lo[a];
    return v;
  }
  return kInfinity;
}

double IndicatorSet::exact_perimeter() const {
  if (empty()) return 0.0;
  if (std::holds_alternative<Interval>(shape_)) return 2.0;
  if (auto* ball = std::get_if<Ball>(&shape_)) {
    const double r = ball->radius;
    return dim_ == 1 ? 2.0 : dim_ == 2 ? 2.0 * std::numbers::pi * r : 4.0 * std::numbers::pi * r * r;
  }
  if (auto* box = std::get_if<Box>(&shape_)) {
    Vec w{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) w[a] = box->hi[a] - box->lo[a];
    if (dim_ == 1) return 2.0;
    if (dim_ == 2) return 2.0 * (w[0] + w[1]);
    return 2.0 * (w[0] * w[1] + w[1] * w[2] + w[2] * w[0]);
  }
  return dim_ == 1 ? 1.0 : kInfinity;
}

bool IndicatorSet::bounded() const { return !std::holds_alternative<HalfSpace>(shape_); }

bool IndicatorSet::empty() const {
  if (!bounded()) return false;
  return !(exact_volume() > 0.0);
}

void IndicatorSet::bounds(Vec& lo, Vec& hi) const {
  lo = Vec{0.0, 0.0, 0.0};
  hi = Vec{0.0, 0.0, 0.0};
  if (auto* iv = std::get_if<Interval>(&shape_)) {
    lo[0] = iv->a;
    hi[0] = iv->b;
  } else if (auto* ball = std::get_if<Ball>(&shape_)) {
    for (int a = 0; a < dim_; ++a) {
      lo[a] = ball->center[a] - ball->radius;
      hi[a] = ball->center[a] + ball->radius;
    }
  } else if (auto* box = std::get_if<Box>(&shape_)) {
    lo = box->lo;
    hi = box->hi;
  } else {
    for (int a = 0; a < dim_; ++a) {
      lo[a] = -kInfinity;
      hi[a] = kInfinity;
    }
  }
}

std::string IndicatorSet::describe() const {
  std::ostringstream s;
  if (auto* iv = std::get_if<Interval>(&shape_)) {
    s << "interval[" << iv->a << "," << iv->b << "]";
  } else if (auto* ball = std::get_if<Ball>(&shape_)) {
    s << "ball(r=" << ball->radius << ")";
  } else if (std::holds_alternative<Box>(shape_)) {
    s << "box";
  } else {
    s << "halfspace";
  }
  return s.str();
}

// -------------------------------------------------------------- Field API

int dimension(const Field& f) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AnalyticField>) return v.dim;
        else if constexpr (std::is_same_v<T, BVField1D>) return 1;
        else return v.dim();
      },
      f);
}

double eval(const Field& f, const Vec& x) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AnalyticField>) {
          return v.value(x);
        } else if constexpr (std::is_same_v<T, GridField>) {
          return v.eval(x);
        } else if constexpr (std::is_same_v<T, BVField1D>) {
          double u = v.smooth.value(x);
          for (const Jump& j : v.jumps) {
            if (j.location < x[0]) u += j.height;
            else if (j.location == x[0]) u += 0.5 * j.height;
            else break;
          }
          return u;
        } else {
          return v.contains(x) ? 1.0 : 0.0;
        }
      },
      f);
}

double eval(const Field& f, std::span<const double> x) {
  const int d = dimension(f);
  if (static_cast<int>(x.size()) != d) {
    throw DomainError("point has dimension " + std::to_string(x.size()) + ", field has " + std::to_string(d));
  }
  Vec p{0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) {
    if (!std::isfinite(x[a])) throw DomainError("point must be finite");
    p[a] = x[a];
  }
  return eval(f, p);
}

bool has_gradient(const Field& f) {
  if (auto* a = std::get_if<AnalyticField>(&f)) return static_cast<bool>(a->gradient);
  if (auto* b = std::get_if<BVField1D>(&f)) return static_cast<bool>(b->smooth.gradient);
  return std::holds_alternative<GridField>(f);
}

Vec gradient(const Field& f, const Vec& x) {
  if (auto* a = std::get_if<AnalyticField>(&f)) {
    if (!a->gradient) throw UnsupportedError("analytic field '" + a->name + "' has no gradient oracle");
    return a->gradient(x);
  }
  if (auto* g = std::get_if<GridField>(&f)) return g->gradient(x);
  if (auto* b = std::get_if<BVField1D>(&f)) {
    if (!b->smooth.gradient) throw UnsupportedError("BV smooth part has no gradient oracle");
    return b->smooth.gradient(x);
  }
  throw UnsupportedError("indicator sets have no pointwise gradient");
}

double increment(const Field& f, const Vec& x, const Vec& h) {
  if (auto* a = std::get_if<AnalyticField>(&f); a && a->increment) return a->increment(x, h);
  return eval(f, x + h) - eval(f, x);
}

bool support_bounds(const Field& f, Vec& lo, Vec& hi) {
  lo = Vec{0.0, 0.0, 0.0};
  hi = Vec{0.0, 0.0, 0.0};
  const int d = dimension(f);
  if (auto* a = std::get_if<AnalyticField>(&f)) {
    if (!std::isfinite(a->support_radius)) return false;
    for (int i = 0; i < d; ++i) {
      lo[i] = -a->support_radius;
      hi[i] = a->support_radius;
    }
    return true;
  }
  if (auto* g = std::get_if<GridField>(&f)) {
    for (int i = 0; i < d; ++i) {
      lo[i] = -g->half_width();
      hi[i] = g->half_width();
    }
    return true;
  }
  if (auto* b = std::get_if<BVField1D>(&f)) {
    if (!std::isfinite(b->smooth.support_radius)) return false;
    lo[0] = -b->smooth.support_radius;
    hi[0] = b->smooth.support_radius;
    if (!b->jumps.empty()) {
      lo[0] = std::min(lo[0], b->jumps.front().location);
      hi[0] = std::max(hi[0], b->jumps.back().location);
    }
    return true;
  }
  const auto& set = std::get<IndicatorSet>(f);
  if (!set.bounded()) return false;
  set.bounds(lo, hi);
  return true;
}

std::vector<double> breakpoints_1d(const Field& f) {
  std::vector<double> out;
  if (auto* b = std::get_if<BVField1D>(&f)) {
    for (const Jump& j : b->jumps) out.push_back(j.location);
  } else if (auto* s = std::get_if<IndicatorSet>(&f); s && s->dim() == 1) {
    Vec lo, hi;
    if (s->bounded()) {
      s->bounds(lo, hi);
      out = {lo[0], hi[0]};
    } else {
      out = {std::get<HalfSpace>(s->shape()).offset * std::get<HalfSpace>(s->shape()).normal[0]};
    }
  }
  return out;
}

std::string describe(const Field& f) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AnalyticField>) return v.name;
        else if constexpr (std::is_same_v<T, GridField>) return "grid(N=" + std::to_string(v.resolution()) + ")";
        else if constexpr (std::is_same_v<T, BVField1D>) return v.smooth.name + "+" + std::to_string(v.jumps.size()) + " jumps";
        else return v.describe();
      },
      f);
}

// ---------------------------------------------------------------- factories

AnalyticField linear_field(int dim, const Vec& V_in) {
  Vec V = V_in;
  for (int a = dim; a < 3; ++a) V[a] = 0.0;  // components beyond d are not part of the field
  AnalyticField f;
  f.dim = dim;
  f.value = [V](const Vec& x) { return dot(V, x); };
  f.gradient = [V](const Vec&) { return V; };
  f.increment = [V](const Vec&, const Vec& h) { return dot(V, h); };
  f.name = "linear";
  return f;
}

AnalyticField constant_field(int dim, double c) {
  AnalyticField f;
  f.dim = dim;
  f.value = [c](const Vec&) { return c; };
  f.gradient = [](const Vec&) { return Vec{0.0, 0.0, 0.0}; };
  f.increment = [](const Vec&, const Vec&) { return 0.0; };
  f.support_radius = 0.0;  // no variation anywhere
  f.name = "constant";
  return f;
}

AnalyticField gaussian_bump(int dim, double support) {
  AnalyticField f;
  f.dim = dim;
  f.value = [](const Vec& x) { return std::exp(-dot(x, x)); };
  f.gradient = [](const Vec& x) { return (-2.0 * std::exp(-dot(x, x))) * x; };
  f.support_radius = support;
  f.name = "bump";
  return f;
}

AnalyticField quadratic_1d() {
  AnalyticField f;
  f.dim = 1;
  f.value = [](const Vec& x) { return x[0] * x[0]; };
  f.gradient = [](const Vec& x) { return Vec{2.0 * x[0], 0.0, 0.0}; };
  f.increment = [](const Vec& x, const Vec& h) { return h[0] * (2.0 * x[0] + h[0]); };
  f.name = "x2";
  return f;
}

BVField1D step_field(double a, double b, double height) {
  if (!(b > a)) throw DomainError("step field needs a < b");
  return BVField1D(constant_field(1, 0.0), {{a, height}, {b, -height}});
}

GridField mollify(const Field& f, int k, double half_width, int resolution) {
  if (k < 1) throw DomainError("mollify needs k >= 1");
  const int d = dimension(f);
  const double h = 2.0 * half_width / resolution;
  if (h > 1.0 / (4.0 * k)) {
    throw ValidityError("grid spacing " + std::to_string(h) + " cannot resolve the 1/k = " +
                        std::to_string(1.0 / k) + " kernel (need h <= 1/(4k))");
  }
  const int M = static_cast<int>(std::floor(1.0 / (k * h)));
  std::vector<Vec> offsets;
  std::vector<double> weights;
  const int span = 2 * M + 1;
  int count = 1;
  for (int a = 0; a < d; ++a) count *= span;
  double mass = 0.0;
  for (int flat = 0; flat < count; ++flat) {
    Vec y{0.0, 0.0, 0.0};
    int rem = flat;
    for (int a = 0; a < d; ++a) {
      y[a] = (rem % span - M) * h;
      rem /= span;
    }
    const double s = k * k * dot(y, y);
    if (s >= 1.0) continue;
    const double w = (1.0 - s) * (1.0 - s);
    offsets.push_back(y);
    weights.push_back(w);
    mass += w;
  }
  for (double& w : weights) w /= mass;
  return GridField::sample(d, half_width, resolution, [&](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < offsets.size(); ++i) s += weights[i] * eval(f, x - offsets[i]);
    return s;
  });
}

}  // namespace bbm
