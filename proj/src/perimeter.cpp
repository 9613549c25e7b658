#include "bbm/perimeter.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bbm/constants.hpp"
#include "bbm/error.hpp"
#include "bbm/gauss.hpp"
#include "bbm/parallel.hpp"

namespace bbm {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrtPi = std::sqrt(kPi);

// √n ∫_a^b e^{-n(t-y)²} dy
double axis_profile(double t, double a, double b, double rn) {
  return 0.5 * kSqrtPi * (std::erf(rn * (b - t)) - std::erf(rn * (a - t)));
}

// W_n for a ball of radius R at distance s from its center.
double ball_profile(int d, double s, double R, double n) {
  const double rn = std::sqrt(n);
  if (d == 1) return axis_profile(s, -R, R, rn);
  const double lo = std::max(-R, s - 9.0 / rn);
  const double hi = std::min(R, s + 9.0 / rn);
  if (!(hi > lo)) return 0.0;
  const GaussRule& g = gauss_legendre(16);
  const int panels = 8;
  const double width = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double y = mid + 0.5 * width * g.nodes[q];
      const double chord2 = std::max(0.0, R * R - y * y);
      // transverse integral over the cross-section disk / segment
      const double cross = d == 2 ? kSqrtPi * std::erf(rn * std::sqrt(chord2)) : kPi * (1.0 - std::exp(-n * chord2));
      sum += 0.5 * width * g.weights[q] * rn * std::exp(-n * (s - y) * (s - y)) * cross;
    }
  }
  return sum;
}

void check_margin(const IndicatorSet& E, double n, const GridSpec& grid) {
  if (!E.bounded()) return;
  Vec lo, hi;
  E.bounds(lo, hi);
  const double margin = 4.0 / std::sqrt(n);
  const double h = 2.0 * grid.half_width / grid.resolution;
  for (int a = 0; a < E.dim(); ++a) {
    if (lo[a] - margin < -grid.half_width || hi[a] + margin > grid.half_width - h) {
      std::ostringstream msg;
      msg << "set " << E.describe() << " needs a margin of 4/sqrt(n) = " << margin << " inside the grid box of half-width "
          << grid.half_width;
      throw ValidityError(msg.str());
    }
  }
}

}  // namespace

std::string to_string(PerimeterMethod m) { return m == PerimeterMethod::Bbm ? "bbm" : "degiorgi"; }

nlohmann::json PerimeterEstimate::to_json() const {
  return {{"set", set.describe()},
          {"dimension", set.dim()},
          {"method", to_string(method)},
          {"n", n},
          {"value", value},
          {"exact", exact},
          {"rel_error", rel_error}};
}

double bbm_perimeter(const IndicatorSet& E, double n, const EnergyOptions& opts) {
  if (!E.bounded()) throw DomainError("bbm_perimeter needs a bounded set");
  if (E.empty()) return 0.0;
  const int d = E.dim();
  return energy(Field{E}, RadialMollifier::gaussian(d, n), 1.0, opts) / gamma(d, 1.0);
}

double degiorgi_value(const IndicatorSet& E, double n, const Vec& x) {
  const int d = E.dim();
  const double rn = std::sqrt(n);
  const auto& shape = E.shape();
  if (const auto* iv = std::get_if<Interval>(&shape)) return axis_profile(x[0], iv->a, iv->b, rn);
  if (const auto* box = std::get_if<Box>(&shape)) {
    double w = 1.0;
    for (int a = 0; a < d; ++a) w *= axis_profile(x[a], box->lo[a], box->hi[a], rn);
    return w;
  }
  if (const auto* ball = std::get_if<Ball>(&shape)) {
    double s2 = 0.0;
    for (int a = 0; a < d; ++a) s2 += (x[a] - ball->center[a]) * (x[a] - ball->center[a]);
    return ball_profile(d, std::sqrt(s2), ball->radius, n);
  }
  const auto& hs = std::get<HalfSpace>(shape);
  double t = -hs.offset;
  for (int a = 0; a < d; ++a) t += hs.normal[a] * x[a];
  return std::pow(kPi, 0.5 * (d - 1)) * 0.5 * kSqrtPi * std::erfc(rn * t);
}

GridField degiorgi_field(const IndicatorSet& E, double n, const GridSpec& grid) {
  if (!(n > 0.0)) throw DomainError("De Giorgi field needs n > 0");
  check_margin(E, n, grid);
  const int d = E.dim();
  const int N = grid.resolution;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(N);
  std::vector<double> values(total);
  const double h = 2.0 * grid.half_width / N;
  parallel_for(total, [&](std::size_t flat) {
    Vec x{0.0, 0.0, 0.0};
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      x[a] = -grid.half_width + static_cast<double>(rem % N) * h;
      rem /= N;
    }
    values[flat] = degiorgi_value(E, n, x);
  });
  return GridField(d, grid.half_width, N, std::move(values));
}

double degiorgi_variation(const IndicatorSet& E, double n, const GridSpec& grid) {
  const GridField W = degiorgi_field(E, n, grid);
  const int d = W.dim();
  const int N = W.resolution();
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(N);
  const double cell = std::pow(W.spacing(), d);
  return cell * ordered_sum(total, [&](std::size_t flat) {
    int idx[3] = {0, 0, 0};
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % N);
      rem /= N;
    }
    return norm(W.node_gradient(std::span<const int>(idx, d)));
  });
}

double degiorgi_perimeter(const IndicatorSet& E, double n, const GridSpec& grid) {
  if (!E.bounded()) throw DomainError("degiorgi_perimeter needs a bounded set");
  if (E.empty()) return 0.0;
  return degiorgi_variation(E, n, grid) / degiorgi_const(E.dim());
}

double degiorgi_halfspace_flux(int d, double n, int resolution) {
  Vec normal{0.0, 0.0, 0.0};
  normal[d - 1] = 1.0;
  const IndicatorSet half(d, HalfSpace{normal, 0.0});
  const double L = 10.0 / std::sqrt(n);
  const double h = 2.0 * L / resolution;
  std::vector<double> w(resolution + 1);
  for (int i = 0; i <= resolution; ++i) {
    Vec x{0.0, 0.0, 0.0};
    x[d - 1] = -L + i * h;
    w[i] = degiorgi_value(half, n, x);
  }
  double flux = 0.0;
  for (int i = 1; i < resolution; ++i) flux += std::abs(w[i + 1] - w[i - 1]) / (2.0 * h) * h;
  return flux;
}

PerimeterEstimate estimate_perimeter(const IndicatorSet& E, PerimeterMethod method, double n, const GridSpec& grid,
                                     const EnergyOptions& opts) {
  const double value = method == PerimeterMethod::Bbm ? bbm_perimeter(E, n, opts) : degiorgi_perimeter(E, n, grid);
  const double exact = E.exact_perimeter();
  const double rel = exact > 0.0 ? std::abs(value - exact) / exact : std::abs(value);
  return PerimeterEstimate{E, method, n, value, exact, rel};
}

}  // namespace bbm
