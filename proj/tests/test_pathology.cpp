#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bbm/error.hpp"
#include "bbm/mollifier.hpp"
#include "bbm/pathology.hpp"
#include "oracles.hpp"

using namespace bbm;

namespace {
const Vec kProbe{0.375, 0.0, 0.0};

PathologyCase make_case(int d, double p, std::vector<double> cutoffs = {}) {
  PathologyCase c;
  c.dimension = d;
  c.p = p;
  c.cutoffs = std::move(cutoffs);
  return c;
}

// |∇u| = ((d-1) + 2/|ln r|) r^{-d} ln^{-2} r where φ ≡ 1
double grad_norm(int d, double r) {
  const double l = std::log(r);
  return std::abs((1.0 - d) * std::pow(r, -d) / (l * l) - 2.0 * std::pow(r, -d) / (l * l * l));
}
}  // namespace

TEST_CASE("field values") {
  const AnalyticField u = pathological_field(2);
  const double l2 = std::log(2.0) * std::log(2.0);
  CHECK(u.value(Vec{0.5, 0.0, 0.0}) == doctest::Approx(2.0 / l2).epsilon(1e-14));
  CHECK(u.value(Vec{0.5, 0.0, 0.0}) == doctest::Approx(4.1628).epsilon(1e-4));
  CHECK(u.value(Vec{0.0, 0.75, 0.0}) == 0.0);
  CHECK(u.value(Vec{2.5, 0.0, 0.0}) == 0.0);
  // cutoff region: continuous descent to 0 (the profile itself still rises
  // towards r = 1 in d = 2, so only the tail is monotone)
  double prev = u.value(Vec{0.66, 0, 0});
  for (double r = 0.67; r < 0.75; r += 0.01) {
    const double v = u.value(Vec{r, 0, 0});
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    prev = v;
  }
  CHECK(u.value(Vec{0.7499, 0, 0}) < 1e-7);  // quintic contact: O((3/4 - r)^3)
  CHECK(std::isfinite(u.value(Vec{0.0, 0.0, 0.0})));
  CHECK(u.value(Vec{0.0, 0.0, 0.0}) == u.value(Vec{1e-12, 0.0, 0.0}));
  const AnalyticField u3 = pathological_field(3);
  CHECK(u3.value(Vec{0.0, 0.3, 0.0}) == doctest::Approx(1.0 / (0.09 * std::log(0.3) * std::log(0.3))).epsilon(1e-14));
  CHECK_THROWS_AS(pathological_field(1), UnsupportedError);
}

TEST_CASE("gradient oracle against central differences") {
  for (int d : {2, 3}) {
    const AnalyticField u = pathological_field(d);
    for (double r : {0.05, 0.3, 0.6, 0.7}) {
      const Vec x{r * 0.6, r * 0.8, 0.0};
      const Vec g = u.gradient(x);
      for (int a = 0; a < 2; ++a) {
        const double hs = 1e-6 * r;
        Vec xp = x, xm = x;
        xp[a] += hs;
        xm[a] -= hs;
        const double fd = (u.value(xp) - u.value(xm)) / (2 * hs);
        CHECK(g[a] == doctest::Approx(fd).epsilon(1e-6).scale(1e-6 * std::abs(u.value(x)) / r));
      }
    }
  }
}

TEST_CASE("the field is in W^{1,1}: inner shells contribute a vanishing amount") {
  for (int d : {2, 3}) {
    const AnalyticField u = pathological_field(d);
    const double area = d == 2 ? 2 * oracle::pi : 4 * oracle::pi;
    // ∫_{a<|x|<3/4} |∇u| with the oracle gradient sampled along a ray (u is radial)
    auto shell = [&](double a, double b) {
      return area * oracle::simpson([&](double t) {
        const double r = std::exp(t);
        const Vec g = u.gradient(Vec{r, 0, 0});
        return std::pow(r, d) * std::hypot(g[0], g[1], g[2]);
      }, std::log(a), std::log(b), 1e-12);
    };
    const double outer = shell(1e-3, 0.5) + shell(0.5, 0.75);
    double total = outer, prev_piece = 1e300;
    for (double a : {1e-6, 1e-12, 1e-24, 1e-48}) {
      const double piece = shell(a, a == 1e-6 ? 1e-3 : std::sqrt(a));
      total += piece;
      CHECK(piece < prev_piece);
      prev_piece = piece;
      // leading order (d-1)|S| / |ln r| between the shell radii
      const double hi = a == 1e-6 ? 1e-3 : std::sqrt(a);
      const double lead = (d - 1) * area * (1.0 / std::abs(std::log(hi)) - 1.0 / std::abs(std::log(a)));
      CHECK(piece == doctest::Approx(lead).epsilon(0.35));
    }
    CHECK(std::isfinite(total));
    CHECK(total < outer + (d - 1) * area / std::abs(std::log(1e-3)) * 1.5);
    // grad_norm agrees with the oracle inside φ ≡ 1
    const Vec g = u.gradient(Vec{0.2, 0, 0});
    CHECK(std::hypot(g[0], g[1], g[2]) == doctest::Approx(grad_norm(d, 0.2)).epsilon(1e-12));
  }
}

TEST_CASE("mollifier lower bound matches the kernel at the far radius") {
  for (double delta : {0.05, 0.1, 0.3}) {
    const auto m = RadialMollifier::power_law(2, delta);
    CHECK(mollifier_lower_bound(delta) == doctest::Approx(m.evaluate(0.625)).epsilon(1e-14));
    CHECK(mollifier_lower_bound(delta) <= m.evaluate(0.125));
    for (double t = 0.125; t <= 0.625; t += 0.05) CHECK(mollifier_lower_bound(delta) <= m.evaluate(t) * (1 + 1e-14));
  }
}

TEST_CASE("supercritical exponent diverges") {
  std::vector<double> cuts;
  for (int k = 3; k <= 10; ++k) cuts.push_back(std::pow(2.0, -k) / 8);
  const auto short_ladder = divergence_probe(make_case(2, 3.0, cuts), kProbe);
  for (std::size_t i = 1; i < short_ladder.values.size(); ++i)
    CHECK(short_ladder.values[i] > short_ladder.values[i - 1]);
  // early levels grow by ~1.35 per step; four more levels let the
  // nondecreasing-increment rule fire
  for (int k = 11; k <= 14; ++k) cuts.push_back(std::pow(2.0, -k) / 8);
  CHECK(divergence_probe(make_case(2, 3.0, cuts), kProbe).classification == Classification::Diverging);
  // far in, the value ratio tends to 2^{p(d-1)-d} = 2
  const auto r = divergence_probe(make_case(2, 3.0), kProbe);
  CHECK(r.classification == Classification::Diverging);
  CHECK(r.longest_growth_run >= 4);
  CHECK(r.values.back() / r.values[r.values.size() - 2] == doctest::Approx(2.0).epsilon(2e-2));
  CHECK(r.mode == ReportMode::LowerBound);
}

TEST_CASE("subcritical exponent converges") {
  const auto r = divergence_probe(make_case(2, 1.5), kProbe);
  CHECK(r.classification == Classification::Converging);
  for (std::size_t i = 1; i < r.values.size(); ++i) CHECK(r.values[i] >= r.values[i - 1]);
}

TEST_CASE("increment ratios follow the radial shell integrals") {
  // far inside, |x - y| ≈ |x| and u(y) dominates: the increments of L_k are
  // proportional to ∫ s^{d-1} (s^{1-d} ln^{-2} s)^p ds over the new shell
  for (int d : {2, 3}) {
    const double p = d == 2 ? 1.5 : 1.2;
    const auto r = divergence_probe(make_case(d, p), kProbe);
    const auto& tau = default_cutoffs();
    for (std::size_t k = 30; k < 34; ++k) {
      const double ratio = r.abs_errors[k + 1] / r.abs_errors[k];
      const double ref = oracle::singular_shell(d, p, tau[k + 1], tau[k]) / oracle::singular_shell(d, p, tau[k], tau[k - 1]);
      CHECK(ratio == doctest::Approx(ref).epsilon(1e-3));
      CHECK(ratio < 1.0);
    }
  }
}

TEST_CASE("smooth control stays bounded") {
  const auto r = divergence_probe(make_case(2, 3.0), gaussian_bump(2), kProbe);
  CHECK(r.classification == Classification::Converging);
  CHECK(r.values.back() < 10.0);
}

TEST_CASE("threshold scans flip once") {
  auto flips = [](const std::vector<ScanEntry>& scan) {
    int n = 0;
    for (std::size_t i = 1; i < scan.size(); ++i) n += scan[i].classification != scan[i - 1].classification;
    return n;
  };
  const auto s2 = threshold_scan(2, 0.1, kProbe, {1.5, 1.9, 2.1, 3.0});
  REQUIRE(s2.size() == 4);
  CHECK(s2[0].classification == Classification::Converging);
  CHECK(s2[1].classification == Classification::Converging);
  CHECK(s2[2].classification == Classification::Diverging);
  CHECK(s2[3].classification == Classification::Diverging);
  CHECK(flips(s2) == 1);
  const auto s3 = threshold_scan(3, 0.1, kProbe, {1.2, 1.4, 1.6, 2.0});
  CHECK(s3[1].classification == Classification::Converging);
  CHECK(s3[2].classification == Classification::Diverging);
  CHECK(flips(s3) == 1);
  for (const auto& e : threshold_scan(2, 0.1, kProbe, {1.5, 3.0}, gaussian_bump(2)))
    CHECK(e.classification == Classification::Converging);
}

TEST_CASE("case validation") {
  CHECK_NOTHROW(make_case(2, 3.0).validate());
  CHECK_THROWS_AS(make_case(2, 2.0).validate(), ValidityError);
  CHECK_THROWS_AS(make_case(4, 3.0).validate(), UnsupportedError);
  PathologyCase c = make_case(2, 3.0);
  c.delta = 0.5;
  CHECK_THROWS_AS(c.validate(), ValidityError);
  CHECK_THROWS_AS(make_case(2, 3.0, {0.01, 0.02}).validate(), ValidityError);
  CHECK_THROWS_AS(make_case(2, 3.0, {0.2}).validate(), ValidityError);
  CHECK_THROWS_AS(divergence_probe(make_case(2, 3.0), Vec{0.2, 0, 0}), ProbeError);
  CHECK_THROWS_AS(divergence_probe(make_case(2, 3.0), Vec{0.3, 0, 0.1}), ProbeError);
  CHECK(make_case(3, 1.6).supercritical());
  CHECK_FALSE(make_case(3, 1.4).supercritical());
  const auto cuts = default_cutoffs();
  CHECK(cuts.size() == 254);
  CHECK(cuts.front() == 1.0 / 64);
}
