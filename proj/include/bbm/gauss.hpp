#pragma once

#include <vector>

namespace bbm {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sum to 2
};

// n-point Gauss-Legendre rule, cached per n.
const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre on [a, b] with `panels` equal panels; appends the
// mapped nodes and weights. Panels are further split at any `cuts` falling
// strictly inside them.
void append_composite_gl(double a, double b, int panels, int order, std::vector<double>& nodes,
                         std::vector<double>& weights, const std::vector<double>& cuts = {});

}  // namespace bbm
