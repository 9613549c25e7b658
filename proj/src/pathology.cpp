#include "bbm/pathology.hpp"

#include <cmath>
#include <functional>

#include "bbm/error.hpp"
#include "bbm/gauss.hpp"
#include "bbm/parallel.hpp"
#include "bbm/quadrature.hpp"

namespace bbm {

namespace {

constexpr double kOuter = 0.125;
constexpr double kCapRadius = 1e-12;
constexpr double kCutInner = 0.5;
constexpr double kCutOuter = 0.75;

// quintic smoothstep from 1 at r = 1/2 down to 0 at r = 3/4
double cutoff(double r) {
  if (r <= kCutInner) return 1.0;
  if (r >= kCutOuter) return 0.0;
  const double t = (r - kCutInner) / (kCutOuter - kCutInner);
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

double cutoff_derivative(double r) {
  if (r <= kCutInner || r >= kCutOuter) return 0.0;
  const double t = (r - kCutInner) / (kCutOuter - kCutInner);
  return -30.0 * t * t * (1.0 - t) * (1.0 - t) / (kCutOuter - kCutInner);
}

// r^{1-d} ln^{-2} r without the cutoff
double profile(int d, double r) {
  const double l = std::log(r);
  return std::pow(r, 1 - d) / (l * l);
}

double radial_value(int d, double r) {
  r = std::max(r, kCapRadius);
  const double phi = cutoff(r);
  return phi == 0.0 ? 0.0 : phi * profile(d, r);
}

using Radial = std::function<double(const Vec&)>;

// ∫ over τ_{k+1} < |y| < τ_k in t = ln|y|, returned per shell. The integrand
// is assembled in log space so |u(y)|^p never overflows near the origin.
std::vector<double> shell_integrals(int d, double p, double delta, const std::vector<double>& edges, const Vec& x,
                                    const Radial& value, const std::function<double(double)>& log_abs_profile) {
  const SphereRule sphere = sphere_rule(d, d == 2 ? 64 : 24);
  const GaussRule& g = gauss_legendre(16);
  const double ux = value(x);
  const double log_delta = std::log(delta);
  std::vector<double> out(edges.size() - 1, 0.0);
  parallel_for(out.size(), [&](std::size_t k) {
    const double t_hi = std::log(edges[k]);
    const double t_lo = std::log(edges[k + 1]);
    const double half = 0.5 * (t_hi - t_lo);
    const double mid = 0.5 * (t_hi + t_lo);
    double sum = 0.0;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double t = mid + half * g.nodes[q];
      const double s = std::exp(t);
      for (std::size_t j = 0; j < sphere.nodes.size(); ++j) {
        const Vec y = s * sphere.nodes[j];
        const double dist = norm(x - y);
        double log_diff;
        if (log_abs_profile) {
          // u(y) = profile(s) for s < 1/8
          const double log_uy = log_abs_profile(s);
          if (log_uy < 50.0) {
            const double diff = std::abs(std::exp(log_uy) - ux);
            if (diff == 0.0) continue;
            log_diff = std::log(diff);
          } else {
            log_diff = log_uy + std::log1p(-ux * std::exp(-log_uy));
          }
        } else {
          const double diff = std::abs(ux - value(y));
          if (diff == 0.0) continue;
          log_diff = std::log(diff);
        }
        // |Δu|^p |x-y|^{-p} δ|x-y|^{δ-1} s^{d-1} · s (from ds = s dt)
        const double log_f = p * log_diff + (delta - 1.0 - p) * std::log(dist) + log_delta + d * t;
        sum += half * g.weights[q] * sphere.weights[j] * std::exp(log_f);
      }
    }
    out[k] = sum;
  });
  return out;
}

ConvergenceReport probe_ladder(const PathologyCase& c, const Vec& probe, const Radial& value,
                               const std::function<double(double)>& log_abs_profile, const std::string& label,
                               const ClassifierConfig& config) {
  c.validate();
  const int d = c.dimension;
  double r2 = 0.0;
  for (int a = 0; a < d; ++a) r2 += probe[a] * probe[a];
  for (int a = d; a < kMaxDim; ++a) {
    if (probe[a] != 0.0) throw ProbeError("probe has nonzero coordinates beyond the dimension");
  }
  const double r = std::sqrt(r2);
  if (!(r > c.probe_inner && r < c.probe_outer)) throw ProbeError("probe must satisfy 1/4 < |x| < 1/2");
  const std::vector<double> cutoffs = c.cutoffs.empty() ? default_cutoffs() : c.cutoffs;

  // shell edges: 1/8, then dyadic steps down to the first cutoff, then the cutoffs
  std::vector<double> edges{kOuter};
  while (edges.back() * 0.5 > cutoffs.front() * (1.0 + 1e-12)) edges.push_back(edges.back() * 0.5);
  const std::size_t first = edges.size();
  edges.insert(edges.end(), cutoffs.begin(), cutoffs.end());
  const std::vector<double> shells = shell_integrals(d, c.p, c.delta, edges, probe, value, log_abs_profile);

  std::vector<double> values;
  double cum = 0.0;
  for (std::size_t k = 0; k < shells.size(); ++k) {
    cum += shells[k];
    if (k + 1 >= first) values.push_back(cum);
  }
  return make_report(label, cutoffs, std::move(values), std::nullopt, ReportMode::LowerBound, config);
}

}  // namespace

void PathologyCase::validate() const {
  if (dimension < 2 || dimension > 3) throw UnsupportedError("pathology needs d in {2, 3}");
  if (!(delta > 0.0 && delta < 0.5)) throw ValidityError("pathology needs 0 < δ < 1/2");
  if (!(p >= 1.0) || !std::isfinite(p)) throw ValidityError("pathology needs p >= 1");
  if (p == critical_exponent()) throw ValidityError("the borderline exponent d/(d-1) is excluded");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (!(cutoffs[i] > 0.0 && cutoffs[i] < kOuter)) throw ValidityError("cutoffs must lie in (0, 1/8)");
    if (i > 0 && !(cutoffs[i] < cutoffs[i - 1])) throw ValidityError("cutoffs must be strictly decreasing");
  }
}

std::vector<double> default_cutoffs(int k_from, int k_to) {
  std::vector<double> t;
  for (int k = k_from; k <= k_to; ++k) t.push_back(std::ldexp(kOuter, -k));
  return t;
}

AnalyticField pathological_field(int d) {
  if (d == 1) throw UnsupportedError("the pathological field needs d >= 2");
  if (d < 2 || d > 3) throw DomainError("pathological field supports d in {2, 3}");
  AnalyticField f;
  f.dim = d;
  f.name = "pathological";
  f.support_radius = kCutOuter;
  f.value = [d](const Vec& x) { return radial_value(d, norm(x)); };
  f.gradient = [d](const Vec& x) {
    const double r = norm(x);
    if (r < kCapRadius || r >= kCutOuter) return Vec{0.0, 0.0, 0.0};
    const double l = std::log(r);
    const double g = profile(d, r);
    const double dg = g / r * ((1.0 - d) - 2.0 / l);
    const double du = cutoff_derivative(r) * g + cutoff(r) * dg;
    return (du / r) * x;
  };
  return f;
}

ConvergenceReport divergence_probe(const PathologyCase& c, const Vec& probe, const ClassifierConfig& config) {
  const int d = c.dimension;
  if (d == 1) throw UnsupportedError("the pathological field needs d >= 2");
  const AnalyticField u = pathological_field(d);
  auto log_profile = [d](double s) {
    const double l = std::log(s);
    return (1.0 - d) * l - 2.0 * std::log(std::abs(l));
  };
  return probe_ladder(c, probe, u.value, log_profile, "pathology", config);
}

ConvergenceReport divergence_probe(const PathologyCase& c, const AnalyticField& control, const Vec& probe,
                                   const ClassifierConfig& config) {
  if (control.dim != c.dimension) throw DomainError("control field dimension differs from the case");
  return probe_ladder(c, probe, control.value, nullptr, "pathology-control:" + control.name, config);
}

std::vector<ScanEntry> threshold_scan(int d, double delta, const Vec& probe, const std::vector<double>& p_ladder,
                                      const std::optional<AnalyticField>& control) {
  std::vector<ScanEntry> out;
  for (double p : p_ladder) {
    PathologyCase c;
    c.dimension = d;
    c.p = p;
    c.delta = delta;
    ConvergenceReport r = control ? divergence_probe(c, *control, probe) : divergence_probe(c, probe);
    out.push_back({p, r.classification, std::move(r)});
  }
  return out;
}

double mollifier_lower_bound(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("δ must lie in (0, 1)");
  return delta * std::pow(0.625, delta - 1.0);
}

}  // namespace bbm
