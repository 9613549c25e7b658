#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bbm/error.hpp"
#include "bbm/maximal.hpp"
#include "oracles.hpp"

using namespace bbm;

namespace {
GridField unit_indicator(double L, int N) {
  return GridField::sample(1, L, N, [](const Vec& x) { return x[0] >= 0.0 && x[0] <= 1.0 ? 1.0 : 0.0; });
}
GridField constant_grid(int d, double c) { return GridField::sample(d, 2.0, 64, [c](const Vec&) { return c; }); }
}  // namespace

TEST_CASE("maximal function of an interval indicator") {
  const GridField f = unit_indicator(4.0, 8192);
  const double ref = oracle::interval_maximal(0.0, 1.0, 2.0, 8.0);
  CHECK(ref == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(std::abs(maximal_function(f, Vec{2.0, 0, 0}) - ref) <= 1e-3);
  CHECK(maximal_function(f, Vec{0.5, 0, 0}) == doctest::Approx(1.0).epsilon(1e-12));
  // restricted radius: only s ≤ 0.5 at x = 2 sees nothing
  CHECK(maximal_function(f, Vec{2.0, 0, 0}, 0.5) == 0.0);
  for (double x : {-0.7, 1.3, 1.9, 3.0}) {
    CHECK(std::abs(maximal_function(f, Vec{x, 0, 0}) - oracle::interval_maximal(0.0, 1.0, x, 8.0, 200000)) <= 1e-3);
  }
}

TEST_CASE("constants are their own maximal function") {
  for (int d = 1; d <= 2; ++d) {
    const GridField f = constant_grid(d, -2.0);
    CHECK(maximal_function(f, Vec{0.3, 0.0, 0}) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(ball_average(f, Vec{0.3, -0.2, 0}, 0.5) == doctest::Approx(2.0).epsilon(1e-6));
  }
  CHECK_THROWS_AS(maximal_function(constant_grid(3, 1.0), Vec{0, 0, 0}), UnsupportedError);
  CHECK_THROWS_AS(maximal_function(constant_grid(1, 1.0), Vec{3.0, 0, 0}), DomainError);
}

TEST_CASE("ball averages in the plane against an angular oracle") {
  const GridField f = GridField::sample(2, 2.0, 256, [](const Vec& x) { return x[0] * x[0] + 0.5 * x[1]; });
  // |f| changes sign inside the ball; reference by nested Simpson in polar coordinates
  const Vec c{0.2, 0.1, 0};
  const double s = 0.6;
  auto ring = [&](double r) {
    return r * oracle::simpson([&](double t) {
      const double x = c[0] + r * std::cos(t), y = c[1] + r * std::sin(t);
      return std::abs(x * x + 0.5 * y);
    }, 0.0, 2.0 * oracle::pi, 1e-10, 20);
  };
  const double ref = oracle::simpson(ring, 0.0, s, 1e-9, 20) / (oracle::pi * s * s);
  CHECK(ball_average(f, c, s) == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("sublinearity and domination of |f| at nodes") {
  const GridField f = random_grid_field(1, 128, 2.0, 3);
  const GridField g = random_grid_field(1, 128, 2.0, 4);
  std::vector<double> sum(f.values().size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = f.values()[i] + g.values()[i];
  const GridField fg(1, 2.0, 128, sum);
  for (double x : {-0.9, -0.2, 0.4, 1.5}) {
    const Vec p{x, 0, 0};
    CHECK(maximal_function(fg, p) <= maximal_function(f, p) + maximal_function(g, p) + 1e-12);
  }
  const auto M = maximal_on_grid(f);
  for (std::size_t i = 0; i < M.size(); ++i) CHECK(M[i] >= std::abs(f.values()[i]) * (1.0 - 1e-9));
}

TEST_CASE("maximal function of measures") {
  RadonMeasure1D atom{std::nullopt, {{0.0, 1.0}}};
  CHECK(measure_maximal(atom, 0.1) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(measure_maximal(atom, 0.0) == kMaximalOverflow);
  CHECK(measure_maximal(atom, 0.1, 0.05) == 0.0);
  CHECK(measure_maximal(RadonMeasure1D{}, 0.3) == 0.0);
  // density plus an atom: both contribute, μ(B) by the exact interpolant integral
  RadonMeasure1D mixed{unit_indicator(4.0, 4096), {{2.0, 0.5}}};
  CHECK(mixed.total_mass() == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(mixed.mass_in(1.5, 2.5) == doctest::Approx(0.5));
  CHECK(mixed.mass_in(2.0, 2.5) == 0.0);  // open interval
  CHECK_THROWS_AS(measure_maximal(RadonMeasure1D{std::nullopt, {{0.0, -1.0}}}, 0.5), DomainError);
}

TEST_CASE("directional maximal function") {
  const Vec V{1.0, -2.0, 0.0};
  const double s = 1.0 / std::sqrt(2.0);
  const Vec sigma{s, s, 0.0};
  CHECK(directional_maximal(linear_field(2, V), sigma, Vec{0.1, 0.2, 0}, 1.0) ==
        doctest::Approx(std::abs(V[0] * s + V[1] * s)).epsilon(1e-12));
  CHECK(directional_maximal(quadratic_1d(), Vec{1, 0, 0}, Vec{1.0, 0, 0}, 1.0) == doctest::Approx(3.0).epsilon(1e-9));
  // smoothstep: gradient supported on [0, 1]
  AnalyticField smooth;
  smooth.dim = 1;
  smooth.value = [](const Vec& x) { const double t = std::clamp(x[0], 0.0, 1.0); return t * t * (3 - 2 * t); };
  smooth.gradient = [](const Vec& x) {
    const double t = x[0];
    return Vec{t > 0 && t < 1 ? 6 * t * (1 - t) : 0.0, 0, 0};
  };
  CHECK(directional_maximal(smooth, Vec{1, 0, 0}, Vec{2.0, 0, 0}, 1.0) == 0.0);
  const GridField g = GridField::sample(1, 1.0, 64, [](const Vec& x) { return x[0]; });
  CHECK_THROWS_AS(directional_maximal(g, Vec{1, 0, 0}, Vec{0.5, 0, 0}, 1.0), ValidityError);
  CHECK(directional_maximal(g, Vec{1, 0, 0}, Vec{-0.5, 0, 0}, 0.5) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(directional_maximal(IndicatorSet(1, Interval{0, 1}), Vec{1, 0, 0}, Vec{0, 0, 0}, 1.0),
                  UnsupportedError);
}

TEST_CASE("kernel bound examples") {
  const GridField one = constant_grid(1, 1.0);
  auto k = kernel_bound_check(one, Vec{0.1, 0, 0}, 0.5);
  CHECK(k.lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.rhs == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(k.ratio == doctest::Approx(2.0).epsilon(1e-12));
  k = kernel_bound_check(unit_indicator(2.0, 1024), Vec{0.5, 0, 0}, 0.25);
  CHECK(k.lhs == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(k.rhs == doctest::Approx(0.25).epsilon(1e-12));
  // d = 2: constant field gives lhs = 2π r and ratio 2π
  k = kernel_bound_check(constant_grid(2, 1.0), Vec{0, 0, 0}, 0.5);
  CHECK(k.ratio == doctest::Approx(2.0 * oracle::pi).epsilon(1e-6));
}

TEST_CASE("weak (1,1) examples") {
  const GridField f = unit_indicator(4.0, 256);
  // Mf(x) = 1/(2x) for x ≥ 1 and 1/(2(1-x)) for x ≤ 0, so {Mf > 1/4} = (-1, 2)
  const auto rows = weak11_check(f, {0.25, 2.0});
  // the interpolant ramps over one cell at each end
  CHECK(std::abs(rows[0].measure - 3.0) <= 4.0 * f.spacing());
  CHECK(rows[0].bound == doctest::Approx(3.0 / 0.25 * l1_norm(f)));
  CHECK(rows[0].pass());
  CHECK(rows[1].measure == 0.0);
  CHECK_THROWS_AS(weak11_check(f, {0.0}), DomainError);
}

TEST_CASE("weak (1,1) holds on seeded random fields") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GridField f = random_grid_field(1, 128, 2.0, seed);
    for (const auto& row : weak11_check(f, {0.05, 0.1, 0.25, 0.5})) CHECK(row.pass());
  }
  const GridField f2 = random_grid_field(2, 24, 2.0, 1);
  for (const auto& row : weak11_check(f2, {0.1, 0.5})) CHECK(row.pass());
}

TEST_CASE("random fields and L1 norms") {
  const GridField a = random_grid_field(1, 64, 2.0, 9);
  const GridField b = random_grid_field(1, 64, 2.0, 9);
  CHECK(a.values() == b.values());
  CHECK(a.values() != random_grid_field(1, 64, 2.0, 10).values());
  for (int i = 0; i < 64; ++i) {
    if (std::abs(a.node_coord(i)) > 1.0) CHECK(a.values()[i] == 0.0);
    CHECK(a.values()[i] >= 0.0);
    CHECK(a.values()[i] < 1.0);
  }
  // exact integral of a piecewise linear interpolant
  const GridField hat = GridField::sample(1, 1.0, 4, [](const Vec& x) { return x[0] == 0.0 ? 2.0 : 0.0; });
  CHECK(l1_norm(hat) == doctest::Approx(1.0));
  // nodes span [-2, 2 - h], h = 1/16
  CHECK(l1_norm(constant_grid(2, -1.0)) == doctest::Approx((4.0 - 1.0 / 16) * (4.0 - 1.0 / 16)).epsilon(1e-12));
}

TEST_CASE("singular kernel bounds") {
  const GridField uniform = constant_grid(1, 1.0);
  auto s = singular_kernel_bound(RadonMeasure1D{uniform, {}}, 0.0, 1.0);
  CHECK(s.lhs == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.rhs == doctest::Approx(1.0).epsilon(1e-9));

  const GridField disk = GridField::sample(2, 2.0, 256, [](const Vec& x) { return x[0] * x[0] + x[1] * x[1] < 1.0 ? 1.0 : 0.0; });
  s = singular_kernel_bound(disk, Vec{0, 0, 0}, 0.5);
  CHECK(s.lhs == doctest::Approx(2.0 * oracle::pi).epsilon(1e-6));
  CHECK(s.rhs == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.lhs <= dyadic_constant(2) * s.rhs);

  // an atom off the center: lhs = 1/r, M_r = 1/(2 dist) at the critical radius
  RadonMeasure1D atom{std::nullopt, {{0.3, 1.0}}};
  s = singular_kernel_bound(atom, 0.0, 0.5);
  CHECK(s.lhs == doctest::Approx(2.0));
  CHECK(s.rhs == doctest::Approx(1.0 / 0.6).epsilon(1e-9));
  CHECK(s.lhs <= 2.0 * s.rhs);
}

TEST_CASE("dyadic shells reassemble the singular integral") {
  const GridField f = random_grid_field(2, 64, 2.0, 5);
  const Vec x{0.1, -0.2, 0};
  const auto shells = singular_kernel_shells(f, x, 0.5, 6);
  CHECK(shells.size() == 7);
  double total = 0.0;
  for (double v : shells) {
    CHECK(v >= 0.0);
    total += v;
  }
  const auto s = singular_kernel_bound(f, x, 0.5);
  CHECK(total == doctest::Approx(s.lhs).epsilon(1e-6));
  CHECK(s.lhs <= dyadic_constant(2) * s.rhs);
  CHECK(dyadic_constant(1) == 4.0);
}
