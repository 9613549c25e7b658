#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bbm/constants.hpp"
#include "bbm/error.hpp"
#include "bbm/gauss.hpp"
#include "bbm/quadrature.hpp"
#include "oracles.hpp"

using namespace bbm;

namespace {
double sum_weights(const SphereRule& s) {
  double t = 0.0;
  for (double w : s.weights) t += w;
  return t;
}
}  // namespace

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 16, 64}) {
    const GaussRule& g = gauss_legendre(n);
    REQUIRE(g.nodes.size() == static_cast<std::size_t>(n));
    const int deg = 2 * n - 1;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], deg - 1);
    // ∫_{-1}^{1} x^{deg-1} dx with deg-1 even
    CHECK(s == doctest::Approx(2.0 / deg).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gauss_legendre(0), DomainError);
}

TEST_CASE("sphere rules: weight sums and second moments") {
  for (int d = 1; d <= 3; ++d) {
    for (int order : {1, 8, 33, 64}) {
      const SphereRule s = sphere_rule(d, order);
      // the polar factor sinθ is not a polynomial: d=3 is exact only at working orders
      const bool exact = d < 3 || order >= 32;
      if (exact) CHECK(std::abs(sum_weights(s) - sphere_area(d)) <= 1e-12);
      for (int a = 0; a < d; ++a) {
        double m2 = 0.0;
        for (std::size_t i = 0; i < s.nodes.size(); ++i) m2 += s.weights[i] * s.nodes[i][a] * s.nodes[i][a];
        if (exact && (order >= 8 || d == 1)) CHECK(std::abs(m2 - sphere_area(d) / d) <= 1e-10);
      }
      for (const Vec& v : s.nodes) CHECK(std::abs(norm(v) - 1.0) <= 1e-14);
    }
  }
}

TEST_CASE("sphere rule examples") {
  const SphereRule s1 = sphere_rule(1, 7);
  CHECK(s1.nodes.size() == 2);
  CHECK(s1.weights[0] == 1.0);
  CHECK(s1.weights[1] == 1.0);
  const SphereRule s2 = sphere_rule(2, 64);
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < s2.nodes.size(); ++i) abs_sum += s2.weights[i] * std::abs(s2.nodes[i][1]);
  CHECK(std::abs(abs_sum - 4.0) <= 1e-10);
  CHECK(std::abs(sum_weights(sphere_rule(3, 32)) - 4.0 * oracle::pi) <= 1e-10);
  CHECK_THROWS_AS(sphere_rule(2, 0), DomainError);
  CHECK_THROWS_AS(sphere_rule(4, 8), UnsupportedError);
}

TEST_CASE("aligned sphere rules integrate |sigma.a| exactly for any axis") {
  const Vec a2{0.6, -0.8, 0.0};
  const SphereRule s2 = align_pole(sphere_rule(2, 64), a2);
  const Vec a3{0.36, -0.48, 0.8};
  const SphereRule s3 = align_pole(sphere_rule(3, 32), a3);
  CHECK(std::abs(sum_weights(s2) - 2.0 * oracle::pi) <= 1e-12);
  for (double p : {1.0, 2.0, 3.0}) {
    double v2 = 0.0, v3 = 0.0;
    for (std::size_t i = 0; i < s2.nodes.size(); ++i) v2 += s2.weights[i] * std::pow(std::abs(dot(s2.nodes[i], a2)), p);
    for (std::size_t i = 0; i < s3.nodes.size(); ++i) v3 += s3.weights[i] * std::pow(std::abs(dot(s3.nodes[i], a3)), p);
    CHECK(std::abs(v2 - oracle::gamma_dp(2, p)) <= 1e-10);
    CHECK(std::abs(v3 - oracle::gamma_dp(3, p)) <= 1e-10);
  }
}

TEST_CASE("radial rules reproduce the normalization") {
  for (int d = 1; d <= 3; ++d) {
    const RadialRule ind = radial_rule(RadialMollifier::indicator(d, 0.3), 0);
    double s = 0.0;
    for (std::size_t i = 0; i < ind.nodes.size(); ++i) {
      CHECK(ind.nodes[i] > 0.0);
      CHECK(ind.nodes[i] < 0.3);
      CHECK(ind.weights[i] >= 0.0);
      s += ind.weights[i];
    }
    CHECK(std::abs(s - 1.0) <= 1e-13);
    CHECK(ind.r_max == 0.3);
  }
  double pl = 0.0;
  for (double w : radial_rule(RadialMollifier::power_law(1, 0.1), 4).weights) pl += w;
  CHECK(std::abs(pl - 1.0) <= 1e-10);
  double g = 0.0;
  for (double w : radial_rule(RadialMollifier::gaussian(2, 16.0), 4).weights) g += w;
  CHECK(std::abs(g - 1.0) <= 1e-10);
  CHECK_THROWS_AS(radial_rule(RadialMollifier::indicator(1, 0.3), -1), DomainError);
}

TEST_CASE("polar integration examples") {
  auto one = [](double, const Vec&) { return 1.0; };
  for (int d = 1; d <= 3; ++d) {
    const double v = integrate_polar(sphere_rule(d, 32), radial_rule(RadialMollifier::gaussian(d, 4.0), 4), one);
    CHECK(std::abs(v - sphere_area(d)) <= 1e-10);
  }
  // F = r with the indicator of radius 1/2 in d = 1: 2 ∫_0^{1/2} 2 r dr
  const double r1 = integrate_polar(sphere_rule(1, 1), radial_rule(RadialMollifier::indicator(1, 0.5), 2),
                                    [](double r, const Vec&) { return r; });
  CHECK(r1 == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("polar integration reproduces gamma") {
  for (int d = 1; d <= 3; ++d) {
    const SphereRule s = sphere_rule(d, d == 2 ? 64 : 32);
    const RadialRule r = radial_rule(RadialMollifier::indicator(d, 0.5), 2);
    Vec e{0.0, 0.0, 0.0};
    e[d - 1] = 1.0;
    for (double p : {1.0, 2.0, 3.0}) {
      const double v = integrate_polar(s, r, [&](double, const Vec& sigma) { return std::pow(std::abs(dot(sigma, e)), p); });
      CHECK(std::abs(v - gamma(d, p)) <= 1e-8);
    }
  }
}

TEST_CASE("radial refinement converges with order at least two") {
  const auto m = RadialMollifier::gaussian(1, 1.0);
  auto F = [](double r, const Vec&) { return std::cos(3.0 * r); };
  const SphereRule s = sphere_rule(1, 1);
  const double i0 = integrate_polar(s, radial_rule(m, 5, 1), F);
  const double i1 = integrate_polar(s, radial_rule(m, 6, 1), F);
  const double i2 = integrate_polar(s, radial_rule(m, 7, 1), F);
  const double order = std::log2(std::abs(i1 - i0) / std::abs(i2 - i1));
  CHECK(order >= 2.0);
}

TEST_CASE("NaN integrands are reported with the node") {
  const SphereRule s = sphere_rule(2, 8);
  const RadialRule r = radial_rule(RadialMollifier::indicator(2, 0.5), 0);
  auto bad = [](double rr, const Vec&) { return rr > 0.25 ? std::numeric_limits<double>::quiet_NaN() : 1.0; };
  CHECK_THROWS_AS(integrate_polar(s, r, bad), EvaluationError);
  try {
    integrate_polar(s, r, bad);
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("r =") != std::string::npos);
  }
}

TEST_CASE("rules are deterministic") {
  const auto a = radial_rule(RadialMollifier::power_law(3, 0.2, true), 5);
  const auto b = radial_rule(RadialMollifier::power_law(3, 0.2, true), 5);
  CHECK(a.nodes == b.nodes);
  CHECK(a.weights == b.weights);
  const auto s = sphere_rule(3, 17), t = sphere_rule(3, 17);
  CHECK(s.weights == t.weights);
}

TEST_CASE("quadrature option defaults") {
  QuadratureOptions q;
  CHECK(q.resolved_sphere_order(2) == 64);
  CHECK(q.resolved_sphere_order(3) == 32);
  q.sphere_order = 12;
  CHECK(q.resolved_sphere_order(3) == 12);
}
