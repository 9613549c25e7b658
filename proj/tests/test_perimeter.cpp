#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bbm/constants.hpp"
#include "bbm/error.hpp"
#include "bbm/perimeter.hpp"
#include "oracles.hpp"

using namespace bbm;

namespace {
const IndicatorSet kUnit(1, Interval{0.0, 1.0});
const IndicatorSet kDisk(2, Ball{{0, 0, 0}, 1.0});
}  // namespace

TEST_CASE("interval: BBM estimator against the Gaussian double integral") {
  for (double n : {16.0, 256.0, 1024.0}) {
    // ∫_E ∫_{E^c} e^{-n(x-y)²} dy dx with the inner integral in closed form;
    // n^{(d+1)/2} = n and A_1 = γ_{1,1} / (2 C_1) = 1/2
    const double rn = std::sqrt(n);
    auto inner = [&](double x) {
      return std::sqrt(oracle::pi) / (2.0 * rn) * (std::erfc(rn * x) + std::erfc(rn * (1.0 - x)));
    };
    const double ref = n / 0.5 * oracle::simpson_pieces(inner, {0.0, 0.5, 1.0}, 1e-14);
    CHECK(bbm_perimeter(kUnit, n) == doctest::Approx(ref).epsilon(1e-8));
  }
  CHECK(bbm_perimeter(kUnit, 1024.0) == doctest::Approx(2.0).epsilon(2e-2));
}

TEST_CASE("degenerate and unbounded sets") {
  CHECK(bbm_perimeter(IndicatorSet(2, Box{{0, 0, 0}, {0, 1, 0}}), 64.0) == 0.0);
  CHECK_THROWS_AS(bbm_perimeter(IndicatorSet(1, HalfSpace{{1, 0, 0}, 0.0}), 64.0), DomainError);
}

TEST_CASE("De Giorgi field values") {
  // half-line x < 0: far field √π, half of it on the boundary
  const IndicatorSet half(1, HalfSpace{{1, 0, 0}, 0.0});
  CHECK(degiorgi_value(half, 16.0, Vec{0, 0, 0}) == doctest::Approx(0.5 * std::sqrt(oracle::pi)).epsilon(1e-12));
  CHECK(degiorgi_value(half, 16.0, Vec{-3.0, 0, 0}) == doctest::Approx(std::sqrt(oracle::pi)).epsilon(1e-12));
  const double n = 256.0;
  CHECK(degiorgi_value(kDisk, n, Vec{1.0 + 7.0 / std::sqrt(n), 0, 0}) < 1e-12);
  CHECK(degiorgi_value(kDisk, n, Vec{0.1, -0.2, 0}) == doctest::Approx(oracle::pi).epsilon(1e-10));
  const IndicatorSet cube(3, Box{{-1, -1, -1}, {1, 1, 1}});
  CHECK(degiorgi_value(cube, n, Vec{0, 0, 0}) == doctest::Approx(std::pow(oracle::pi, 1.5)).epsilon(1e-10));
}

TEST_CASE("half-space flux equals the plateau height") {
  for (int d = 1; d <= 3; ++d)
    CHECK(degiorgi_halfspace_flux(d, 64.0, 4096) == doctest::Approx(std::pow(oracle::pi, 0.5 * d)).epsilon(1e-6));
}

TEST_CASE("De Giorgi perimeter examples") {
  CHECK(degiorgi_perimeter(kUnit, 1024.0, GridSpec{1.5, 4096}) == doctest::Approx(2.0).epsilon(2e-2));
  CHECK(degiorgi_perimeter(kDisk, 4096.0, GridSpec{1.5, 512}) == doctest::Approx(2.0 * oracle::pi).epsilon(2e-2));
}

TEST_CASE("dilation at matched n scales the perimeter") {
  const IndicatorSet small(2, Box{{-0.5, -0.5, 0}, {0.5, 0.5, 0}});
  const IndicatorSet large(2, Box{{-1.0, -1.0, 0}, {1.0, 1.0, 0}});
  const double ps = degiorgi_perimeter(small, 1024.0, GridSpec{0.75, 256});
  const double pl = degiorgi_perimeter(large, 256.0, GridSpec{1.5, 256});
  CHECK(pl / ps == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(pl == doctest::Approx(8.0).epsilon(2e-2));
}

TEST_CASE("ball estimates improve along the n ladder") {
  double prev = 1.0;
  for (double n : {256.0, 1024.0, 4096.0}) {
    const auto e = estimate_perimeter(kDisk, PerimeterMethod::DeGiorgi, n, GridSpec{1.5, 512});
    CHECK(e.rel_error < prev);
    prev = e.rel_error;
  }
}

TEST_CASE("translation invariance") {
  const IndicatorSet moved(2, Ball{{0.2, -0.1, 0}, 1.0});
  // shifts by whole grid cells keep the rule identical
  const double h = 3.0 / 512;
  const IndicatorSet snapped(2, Ball{{16 * h, -8 * h, 0}, 1.0});
  const double base = degiorgi_perimeter(kDisk, 1024.0, GridSpec{1.5, 512});
  CHECK(degiorgi_perimeter(snapped, 1024.0, GridSpec{1.5, 512}) == doctest::Approx(base).epsilon(1e-4));
  CHECK(degiorgi_perimeter(moved, 1024.0, GridSpec{1.5, 512}) == doctest::Approx(base).epsilon(1e-3));
  EnergyOptions opts;
  opts.resolution = 64;
  CHECK(bbm_perimeter(moved, 64.0, opts) == doctest::Approx(bbm_perimeter(kDisk, 64.0, opts)).epsilon(1e-3));
}

TEST_CASE("the two estimators agree on the disk") {
  EnergyOptions opts;
  opts.resolution = 64;
  const auto a = estimate_perimeter(kDisk, PerimeterMethod::Bbm, 64.0, {}, opts);
  const auto b = estimate_perimeter(kDisk, PerimeterMethod::DeGiorgi, 4096.0, GridSpec{1.5, 512});
  CHECK(std::abs(a.value - b.value) / a.exact <= 4e-2);
  CHECK(a.exact == doctest::Approx(2.0 * oracle::pi));
  CHECK(a.rel_error == doctest::Approx(std::abs(a.value - a.exact) / a.exact));
  const auto j = a.to_json();
  CHECK(j.at("method") == "bbm");
  CHECK(j.at("n") == 64.0);
  CHECK(j.at("value") == a.value);
}

TEST_CASE("grids without margin are rejected") {
  CHECK_THROWS_AS(degiorgi_field(kDisk, 16.0, GridSpec{1.5, 256}), ValidityError);
  CHECK_THROWS_AS(degiorgi_perimeter(kUnit, 1024.0, GridSpec{1.0, 4096}), ValidityError);
}
