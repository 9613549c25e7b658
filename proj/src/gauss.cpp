#include "bbm/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "bbm/error.hpp"

namespace bbm {

namespace {

GaussRule build_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    if (n == 1) {
      slot = std::make_unique<GaussRule>(GaussRule{{0.0}, {2.0}});
    } else {
      slot = std::make_unique<GaussRule>(build_rule(n));
    }
  }
  return *slot;
}

void append_composite_gl(double a, double b, int panels, int order, std::vector<double>& nodes,
                         std::vector<double>& weights, const std::vector<double>& cuts) {
  const GaussRule& g = gauss_legendre(order);
  const double width = (b - a) / panels;
  std::vector<double> sorted(cuts);
  std::sort(sorted.begin(), sorted.end());
  auto piece = [&](double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = lo + half;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      nodes.push_back(mid + half * g.nodes[i]);
      weights.push_back(half * g.weights[i]);
    }
  };
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double hi = p + 1 == panels ? b : lo + width;
    double from = lo;
    for (double c : sorted) {
      if (c > from && c < hi) {
        piece(from, c);
        from = c;
      }
    }
    piece(from, hi);
  }
}

}  // namespace bbm
