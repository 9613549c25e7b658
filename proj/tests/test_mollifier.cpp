#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "bbm/error.hpp"
#include "bbm/mollifier.hpp"
#include "oracles.hpp"

using bbm::RadialMollifier;

TEST_CASE("indicator evaluates d eps^-d inside its support") {
  CHECK(RadialMollifier::indicator(1, 0.5).evaluate(0.25) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(RadialMollifier::indicator(2, 0.5).evaluate(0.25) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(RadialMollifier::indicator(3, 0.1).evaluate(0.2) == 0.0);
}

TEST_CASE("power law vanishes beyond one") {
  const auto m = RadialMollifier::power_law(1, 0.1);
  CHECK(m.evaluate(1.5) == 0.0);
  CHECK(m.evaluate(0.5) == doctest::Approx(0.1 * std::pow(0.5, -0.9)));
  const auto n = RadialMollifier::power_law(3, 0.1, true);
  CHECK(n.evaluate(0.5) == doctest::Approx((0.1 + 2.0) / 0.1 * 0.1 * std::pow(0.5, -0.9)));
}

TEST_CASE("gaussian profile matches the normalizing constant from a direct integral") {
  for (int d = 1; d <= 3; ++d) {
    // C_d solves C ∫_0^∞ r^d e^{-r²} dr = 1 at n = 1
    const double moment = oracle::simpson([d](double r) { return std::pow(r, d) * std::exp(-r * r); }, 0.0, 12.0);
    const double C = 1.0 / moment;
    const auto m = RadialMollifier::gaussian(d, 1.0);
    CHECK(m.evaluate(1.0) == doctest::Approx(C * std::exp(-1.0)).epsilon(1e-10));
  }
  CHECK(RadialMollifier::gaussian(1, 1.0).evaluate(1.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("evaluate rejects nonpositive radii") {
  const auto m = RadialMollifier::indicator(2, 0.5);
  CHECK_THROWS_AS(m.evaluate(0.0), bbm::DomainError);
  CHECK_THROWS_AS(m.evaluate(-1.0), bbm::DomainError);
}

TEST_CASE("built-in families are normalized") {
  for (int d = 1; d <= 3; ++d) {
    for (double eps : {1.0, 0.3, 1e-3}) CHECK(std::abs(RadialMollifier::indicator(d, eps).normalization() - 1.0) <= 1e-10);
    for (double n : {1.0, 4.0, 16.0, 1024.0}) CHECK(std::abs(RadialMollifier::gaussian(d, n).normalization() - 1.0) <= 1e-10);
    for (double delta : {0.05, 0.1, 0.3, 0.45}) {
      CHECK(std::abs(RadialMollifier::power_law(d, delta, true).normalization() - 1.0) <= 1e-10);
      // raw form keeps the prefactor: mass δ/(δ+d-1)
      CHECK(RadialMollifier::power_law(d, delta).normalization() == doctest::Approx(delta / (delta + d - 1)).epsilon(1e-10));
    }
  }
  CHECK(std::abs(RadialMollifier::power_law(1, 0.3).normalization() - 1.0) <= 1e-10);
}

TEST_CASE("tail mass") {
  CHECK(RadialMollifier::indicator(1, 0.1).tail_mass(0.2) == 0.0);
  CHECK(RadialMollifier::power_law(1, 0.5).tail_mass(0.5) == doctest::Approx(1.0 - std::sqrt(0.5)).epsilon(1e-10));
  double prev = 1.0;
  for (double n : {1.0, 4.0, 16.0, 64.0}) {
    const double t = RadialMollifier::gaussian(2, n).tail_mass(0.5);
    // oracle: the tail of C_2 n^{3/2} r² e^{-n r²} by adaptive Simpson
    const double C2 = 4.0 / std::sqrt(oracle::pi);
    const double ref = oracle::simpson([&](double r) { return C2 * std::pow(n, 1.5) * r * r * std::exp(-n * r * r); }, 0.5, 0.5 + 40.0 / std::sqrt(n));
    CHECK(t == doctest::Approx(ref).epsilon(1e-8));
    CHECK(t < prev);
    prev = t;
  }
  double prev_eps = 2.0;
  for (double eps : {0.8, 0.6, 0.5, 0.4}) {
    const double t = RadialMollifier::indicator(3, eps).tail_mass(0.3);
    CHECK(t < prev_eps);
    prev_eps = t;
  }
}

TEST_CASE("monotonicity probe") {
  CHECK(RadialMollifier::indicator(2, 0.3).is_nonincreasing(64));
  CHECK(RadialMollifier::power_law(2, 0.1).is_nonincreasing(64));
  CHECK_FALSE(RadialMollifier::gaussian(1, 1.0).is_nonincreasing(64));
}

TEST_CASE("support flag") {
  CHECK(RadialMollifier::indicator(2, 1.0).vanishes_beyond_one());
  CHECK(RadialMollifier::power_law(2, 0.2).vanishes_beyond_one());
  CHECK_FALSE(RadialMollifier::gaussian(2, 64.0).vanishes_beyond_one());
  CHECK(std::isinf(RadialMollifier::gaussian(2, 64.0).support_radius()));
  // the truncation point leaves a relative tail below 1e-14
  const auto g = RadialMollifier::gaussian(2, 64.0);
  CHECK(g.tail_mass(g.quadrature_radius()) < 1e-13);
}

TEST_CASE("constructor preconditions") {
  CHECK_THROWS_AS(RadialMollifier::indicator(4, 0.5), bbm::Error);
  CHECK_THROWS_AS(RadialMollifier::indicator(1, 0.0), bbm::DomainError);
  CHECK_THROWS_AS(RadialMollifier::gaussian(2, -1.0), bbm::DomainError);
  CHECK_THROWS_AS(RadialMollifier::power_law(2, 1.0), bbm::DomainError);
}

TEST_CASE("custom kernels are validated on first use") {
  const auto good = RadialMollifier::custom(1, [](double r) { return r < 2.0 ? 0.5 : 0.0; }, 2.0);
  CHECK_NOTHROW(good.validate());
  CHECK(good.normalization() == doctest::Approx(1.0).epsilon(1e-10));
  const auto bad = RadialMollifier::custom(1, [](double r) { return r < 1.0 ? 3.0 : 0.0; }, 1.0);
  CHECK_THROWS_AS(bad.validate(), bbm::IntegrationError);
  // unbounded support goes through r = t/(1-t)
  const auto exp_kernel = RadialMollifier::custom(1, [](double r) { return std::exp(-r); }, std::numeric_limits<double>::infinity());
  CHECK(exp_kernel.normalization() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("json round trip") {
  for (const auto& m : {RadialMollifier::indicator(2, 0.25), RadialMollifier::gaussian(3, 16.0),
                        RadialMollifier::power_law(2, 0.1, true)}) {
    const auto j = m.to_json();
    const auto back = RadialMollifier::from_json(j);
    CHECK(back.kind() == m.kind());
    CHECK(back.dimension() == m.dimension());
    CHECK(back.param() == m.param());
    CHECK(back.normalized() == m.normalized());
    CHECK(back.evaluate(0.2) == m.evaluate(0.2));
  }
  const auto j = RadialMollifier::power_law(2, 0.1).to_json();
  CHECK(j.at("kind") == "powerlaw");
  CHECK(j.at("normalized") == false);
  CHECK_THROWS_AS(RadialMollifier::from_json(nlohmann::json{{"kind", "triangle"}, {"dimension", 1}, {"param", 1.0}}), bbm::DomainError);
}

TEST_CASE("concurrent first use of a custom kernel is safe") {
  const auto m = RadialMollifier::custom(2, [](double r) { return r < 1.0 ? 2.0 : 0.0; }, 1.0);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 4; ++i) threads.emplace_back([&] {
    m.validate();
    ok += 1;
  });
  for (auto& t : threads) t.join();
  CHECK(ok == 4);
}
