#include "bbm/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bbm/error.hpp"
#include "bbm/gauss.hpp"
#include "bbm/parallel.hpp"
#include "bbm/quadrature.hpp"

namespace bbm {

namespace {

constexpr double kPi = std::numbers::pi;

double unit_ball_volume(int d) { return d == 1 ? 2.0 : d == 2 ? kPi : 4.0 / 3.0 * kPi; }

// h ∫_0^τ |a + (b - a)u| du
double linear_abs_integral(double a, double b, double tau, double h) {
  if (tau <= 0.0) return 0.0;
  if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) return h * std::abs(a * tau + 0.5 * (b - a) * tau * tau);
  const double u0 = a / (a - b);
  if (tau <= u0) return h * std::abs(a * tau + 0.5 * (b - a) * tau * tau);
  return h * (0.5 * std::abs(a) * u0 + 0.5 * std::abs(b - a) * (tau - u0) * (tau - u0));
}

// Exact antiderivative of |interp| for a 1D grid field.
class Prefix1D {
 public:
  explicit Prefix1D(const GridField& f) : f_(f), cum_(f.resolution(), 0.0) {
    const auto& v = f.values();
    for (int i = 1; i < f.resolution(); ++i) cum_[i] = cum_[i - 1] + linear_abs_integral(v[i - 1], v[i], 1.0, f.spacing());
  }

  double at(double t) const {
    const int N = f_.resolution();
    const double u = (t + f_.half_width()) / f_.spacing();
    if (!(u > 0.0)) return 0.0;
    if (u >= N - 1) return cum_[N - 1];
    const int i = static_cast<int>(std::floor(u));
    const auto& v = f_.values();
    return cum_[i] + linear_abs_integral(v[i], v[i + 1], u - i, f_.spacing());
  }

  double over(double lo, double hi) const { return at(hi) - at(lo); }
  double total() const { return cum_.back(); }

 private:
  const GridField& f_;
  std::vector<double> cum_;
};

// s -> ∫_{B(x,s)} |f| for 0 < s <= s_max. Exact in d = 1; in d = 2 the
// cumulative polar integral is tabulated on shells of width h/4 (Gauss in s,
// product rule in angle) and interpolated by cubic Hermite with F' = s·ring(s).
class BallProfile {
 public:
  BallProfile(const GridField& f, const Vec& x, double s_max, int sphere_order) : f_(f), x_(x) {
    if (f.dim() == 1) {
      prefix_.emplace(f);
      return;
    }
    if (f.dim() != 2) throw UnsupportedError("maximal functions are implemented for d = 1 and d = 2");
    sphere_ = sphere_rule(2, sphere_order);
    step_ = 0.25 * f.spacing();
    const int panels = std::max(1, static_cast<int>(std::ceil(s_max / step_)));
    const GaussRule& g = gauss_legendre(3);
    cum_.assign(panels + 1, 0.0);
    slope_.assign(panels + 1, 0.0);
    for (int k = 0; k < panels; ++k) {
      const double a = k * step_;
      double sum = 0.0;
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        const double s = a + 0.5 * step_ * (1.0 + g.nodes[q]);
        sum += 0.5 * step_ * g.weights[q] * s * ring(s);
      }
      cum_[k + 1] = cum_[k] + sum;
      slope_[k + 1] = (k + 1) * step_ * ring((k + 1) * step_);
    }
  }

  double operator()(double s) const {
    if (prefix_) return prefix_->over(x_[0] - s, x_[0] + s);
    const double u = s / step_;
    const int k = std::min(static_cast<int>(u), static_cast<int>(cum_.size()) - 2);
    const double t = u - k;
    // cubic Hermite on [k, k+1] in units of step_
    const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t), h10 = t * (1.0 - t) * (1.0 - t);
    const double h01 = t * t * (3.0 - 2.0 * t), h11 = t * t * (t - 1.0);
    return h00 * cum_[k] + h10 * step_ * slope_[k] + h01 * cum_[k + 1] + h11 * step_ * slope_[k + 1];
  }

 private:
  double ring(double s) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < sphere_.nodes.size(); ++k) sum += sphere_.weights[k] * std::abs(f_.eval(x_ + s * sphere_.nodes[k]));
    return sum;
  }

  const GridField& f_;
  Vec x_;
  std::optional<Prefix1D> prefix_;
  SphereRule sphere_;
  double step_ = 0.0;
  std::vector<double> cum_, slope_;
};

std::vector<double> log_radii(double lo, double hi, int count) {
  std::vector<double> r(count);
  if (count == 1 || !(hi > lo)) {
    std::fill(r.begin(), r.end(), hi);
    return r;
  }
  for (int i = 0; i < count; ++i) r[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  r.back() = hi;
  return r;
}

// Supremum of value(s) over a log grid with doubling refinement and local
// bracket refinement around the best radius. `extra` radii are always included.
template <class Batch>
double sup_search(const Batch& averages, double s_min, double s_max, const std::vector<double>& extra,
                  const MaximalOptions& opts) {
  auto best_of = [&](std::vector<double> radii, std::size_t* where, std::vector<double>* sorted) {
    radii.insert(radii.end(), extra.begin(), extra.end());
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    const std::vector<double> vals = averages(radii);
    std::size_t k = 0;
    for (std::size_t i = 1; i < vals.size(); ++i) {
      if (vals[i] > vals[k]) k = i;
    }
    if (where) *where = k;
    if (sorted) *sorted = radii;
    return vals.empty() ? 0.0 : vals[k];
  };

  int count = opts.radii;
  std::size_t idx = 0;
  std::vector<double> radii;
  double best = best_of(log_radii(s_min, s_max, count), &idx, &radii);
  while (opts.check_refinement && count < opts.max_radii) {
    std::size_t idx2 = 0;
    std::vector<double> radii2;
    const double finer = best_of(log_radii(s_min, s_max, 2 * count), &idx2, &radii2);
    count *= 2;
    const double change = std::abs(finer - best) / std::max(std::abs(finer), 1e-300);
    if (finer >= best) {
      best = finer;
      idx = idx2;
      radii = radii2;
    }
    if (change < opts.refine_tol) break;
  }
  // local refinement in the bracket around the best radius
  double lo = idx > 0 ? radii[idx - 1] : 0.5 * radii[idx];
  double hi = idx + 1 < radii.size() ? radii[idx + 1] : radii[idx];
  for (int iter = 0; iter < 3 && hi > lo; ++iter) {
    std::vector<double> sub(33);
    for (int i = 0; i < 33; ++i) sub[i] = lo + (hi - lo) * i / 32.0;
    std::size_t k = 0;
    std::vector<double> sorted;
    std::vector<double> none;
    sub.erase(std::remove_if(sub.begin(), sub.end(), [&](double s) { return !(s > 0.0) || s > s_max; }), sub.end());
    if (sub.empty()) break;
    const std::vector<double> vals = averages(sub);
    for (std::size_t i = 1; i < vals.size(); ++i) {
      if (vals[i] > vals[k]) k = i;
    }
    best = std::max(best, vals[k]);
    lo = sub[k > 0 ? k - 1 : 0];
    hi = sub[std::min(k + 1, sub.size() - 1)];
  }
  return best;
}

void check_inside(const GridField& f, const Vec& x) {
  for (int a = 0; a < f.dim(); ++a) {
    if (x[a] < -f.half_width() || x[a] > f.half_width()) throw DomainError("maximal function probe lies outside the grid box");
  }
}

}  // namespace

double RadonMeasure1D::mass_in(double lo, double hi) const {
  double m = 0.0;
  if (density) {
    if (density->dim() != 1) throw DomainError("RadonMeasure1D density must be one-dimensional");
    m += Prefix1D(*density).over(lo, hi);
  }
  for (const Atom& a : atoms) {
    if (a.location > lo && a.location < hi) m += a.mass;
  }
  return m;
}

double RadonMeasure1D::total_mass() const { return mass_in(-kInfinity, kInfinity); }

double l1_norm(const GridField& f) {
  if (f.dim() == 1) return Prefix1D(f).total();
  // trapezoid; exact for the multilinear interpolant of nonnegative data
  const int N = f.resolution();
  const int d = f.dim();
  double sum = 0.0;
  std::size_t total = f.values().size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    double w = 1.0;
    std::size_t rem = flat;
    for (int a = 0; a < d; ++a) {
      const std::size_t i = rem % N;
      rem /= N;
      if (i == 0 || i == static_cast<std::size_t>(N - 1)) w *= 0.5;
    }
    sum += w * std::abs(f.values()[flat]);
  }
  return sum * std::pow(f.spacing(), d);
}

double ball_average(const GridField& f, const Vec& x, double s, const MaximalOptions& opts) {
  if (!(s > 0.0)) throw DomainError("ball radius must be positive");
  return BallProfile(f, x, s, opts.sphere_order)(s) / (unit_ball_volume(f.dim()) * std::pow(s, f.dim()));
}

double maximal_function(const GridField& f, const Vec& x, double R, const MaximalOptions& opts) {
  check_inside(f, x);
  if (!(R > 0.0)) throw DomainError("maximal function radius bound must be positive");
  const int d = f.dim();
  const double s_max = std::min(R, 2.0 * f.half_width() * std::sqrt(static_cast<double>(d)));
  const double s_min = std::min(f.spacing(), s_max);
  const double vol = unit_ball_volume(d);
  const BallProfile profile(f, x, s_max, opts.sphere_order);
  auto averages = [&](const std::vector<double>& radii) {
    std::vector<double> v(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) v[i] = profile(radii[i]) / (vol * std::pow(radii[i], d));
    return v;
  };
  // the interpolant is continuous, so averages tend to |f(x)| as s → 0
  return std::max(std::abs(f.eval(x)), sup_search(averages, s_min, s_max, {}, opts));
}

std::vector<double> maximal_on_grid(const GridField& f, const MaximalOptions& opts) {
  const int d = f.dim();
  const int N = f.resolution();
  std::vector<double> out(f.values().size());
  parallel_for(out.size(), [&](std::size_t flat) {
    int idx[3] = {0, 0, 0};
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % N);
      rem /= N;
    }
    out[flat] = maximal_function(f, f.node(std::span<const int>(idx, d)), kInfinity, opts);
  });
  return out;
}

std::vector<Weak11Row> weak11_check(const GridField& f, const std::vector<double>& eps_ladder, const MaximalOptions& opts) {
  const std::vector<double> M = maximal_on_grid(f, opts);
  const double cell = std::pow(f.spacing(), f.dim());
  const double l1 = l1_norm(f);
  const double c = std::pow(3.0, f.dim());
  std::vector<Weak11Row> rows;
  for (double eps : eps_ladder) {
    if (!(eps > 0.0)) throw DomainError("weak11 levels must be positive");
    std::size_t count = 0;
    for (double m : M) count += m > eps ? 1 : 0;
    rows.push_back({eps, static_cast<double>(count) * cell, c * l1 / eps});
  }
  return rows;
}

double measure_maximal(const RadonMeasure1D& mu, double x, double R, const MaximalOptions& opts) {
  if (!(R > 0.0)) throw DomainError("maximal function radius bound must be positive");
  for (const Atom& a : mu.atoms) {
    if (a.mass < 0.0) throw DomainError("atom masses must be nonnegative");
    if (a.location == x && a.mass > 0.0) return kMaximalOverflow;
  }
  std::optional<Prefix1D> prefix;
  double extent = 0.0;
  double s_min = kInfinity;
  if (mu.density) {
    if (mu.density->dim() != 1) throw DomainError("RadonMeasure1D density must be one-dimensional");
    prefix.emplace(*mu.density);
    extent = std::abs(x) + mu.density->half_width();
    s_min = mu.density->spacing();
  }
  std::vector<double> critical;
  for (const Atom& a : mu.atoms) {
    const double dist = std::abs(a.location - x);
    extent = std::max(extent, dist);
    // open balls: the supremum over s > dist is approached from above
    const double s = dist * (1.0 + 1e-12);
    if (s <= R) critical.push_back(s);
  }
  if (extent == 0.0) return 0.0;
  const double s_max = std::min(R, 2.0 * extent);
  if (!std::isfinite(s_min)) s_min = 1e-6 * s_max;
  s_min = std::min(s_min, s_max);
  auto averages = [&](const std::vector<double>& radii) {
    std::vector<double> v(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double s = radii[i];
      double m = prefix ? prefix->over(x - s, x + s) : 0.0;
      for (const Atom& a : mu.atoms) {
        if (std::abs(a.location - x) < s) m += a.mass;
      }
      v[i] = m / (2.0 * s);
    }
    return v;
  };
  return sup_search(averages, s_min, s_max, critical, opts);
}

double directional_maximal(const Field& v, const Vec& sigma, const Vec& x, double R, const MaximalOptions& opts) {
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("directional maximal needs a finite R > 0");
  const int d = dimension(v);
  if (const auto* g = std::get_if<GridField>(&v)) {
    if (!g->inside(x) || !g->inside(x + R * sigma)) throw ValidityError("segment x + [0,R]σ leaves the grid box");
  }
  if (!has_gradient(v)) throw UnsupportedError("directional maximal needs a gradient");
  (void)d;
  const GaussRule& g = gauss_legendre(4);
  const int panels = 1024;
  auto averages = [&](const std::vector<double>& radii) {
    std::vector<double> edges(radii.begin(), radii.end());
    const double top = radii.back();
    for (int k = 1; k < panels; ++k) edges.push_back(top * k / panels);
    std::sort(edges.begin(), edges.end());
    std::vector<double> out(radii.size());
    double cum = 0.0, prev = 0.0;
    std::size_t j = 0;
    for (double e : edges) {
      const double half = 0.5 * (e - prev);
      if (half > 0.0) {
        const double mid = 0.5 * (e + prev);
        for (std::size_t q = 0; q < g.nodes.size(); ++q) {
          const double s = mid + half * g.nodes[q];
          cum += half * g.weights[q] * std::abs(dot(gradient(v, x + s * sigma), sigma));
        }
      }
      prev = e;
      while (j < radii.size() && radii[j] <= e) {
        out[j] = cum / radii[j];
        ++j;
      }
    }
    return out;
  };
  return sup_search(averages, R * 1e-4, R, {R}, opts);
}

namespace {

// ∫_{S^{d-1}} ∫_0^r |f(x + sσ)| ds dσ
double segment_integral(const GridField& f, const Vec& x, double r) {
  if (f.dim() == 1) {
    const Prefix1D prefix(f);
    return prefix.over(x[0] - r, x[0] + r);
  }
  const SphereRule sphere = sphere_rule(2, 64);
  const GaussRule& g = gauss_legendre(4);
  const int panels = std::max(8, static_cast<int>(std::ceil(r / f.spacing())));
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double half = 0.5 * r / panels;
    const double mid = (p + 0.5) * r / panels;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double s = mid + half * g.nodes[q];
      for (std::size_t k = 0; k < sphere.nodes.size(); ++k) {
        sum += half * g.weights[q] * sphere.weights[k] * std::abs(f.eval(x + s * sphere.nodes[k]));
      }
    }
  }
  return sum;
}

}  // namespace

KernelBound kernel_bound_check(const GridField& f, const Vec& x, double r, const MaximalOptions& opts) {
  if (!(r > 0.0)) throw DomainError("kernel bound radius must be positive");
  const double lhs = segment_integral(f, x, r);
  const double rhs = r * maximal_function(f, x, r, opts);
  return {lhs, rhs, rhs > 0.0 ? lhs / rhs : 0.0};
}

SingularBound singular_kernel_bound(const RadonMeasure1D& mu, double x, double r, const MaximalOptions& opts) {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  // |y - x|^{1-d} ≡ 1 in d = 1
  const double lhs = mu.mass_in(x - r, x + r) / r;
  return {lhs, measure_maximal(mu, x, r, opts)};
}

SingularBound singular_kernel_bound(const GridField& density, const Vec& x, double r, const MaximalOptions& opts) {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  // in polar coordinates |y - x|^{1-d} dy = ds dσ
  const double lhs = segment_integral(density, x, r) / r;
  return {lhs, maximal_function(density, x, r, opts)};
}

std::vector<double> singular_kernel_shells(const GridField& density, const Vec& x, double r, int shells) {
  std::vector<double> out;
  double outer = segment_integral(density, x, r);
  for (int m = 0; m < shells; ++m) {
    const double inner = segment_integral(density, x, r * std::ldexp(1.0, -(m + 1)));
    out.push_back((outer - inner) / r);
    outer = inner;
  }
  out.push_back(outer / r);
  return out;
}

double dyadic_constant(int d) { return unit_ball_volume(d) * std::pow(2.0, d); }

GridField random_grid_field(int d, int resolution, double half_width, std::uint64_t seed, double support) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return GridField::sample(d, half_width, resolution, [&](const Vec& x) {
    for (int a = 0; a < d; ++a) {
      if (std::abs(x[a]) > support) return 0.0;
    }
    const double u = unit(rng);
    return u * u * u;
  });
}

}  // namespace bbm
