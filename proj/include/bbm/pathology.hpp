#pragma once

#include <optional>
#include <vector>

#include "bbm/convergence.hpp"
#include "bbm/field.hpp"

namespace bbm {

// Power-law mollifier δ t^{δ-1} on (0,1) paired with
// u(x) = φ(|x|) |x|^{1-d} ln^{-2}|x|, φ ≡ 1 on |x| <= 1/2 and ≡ 0 on |x| >= 3/4.
struct PathologyCase {
  int dimension = 2;
  double p = 3.0;
  double delta = 0.1;
  double probe_inner = 0.25;  // probes must satisfy inner < |x| < outer
  double probe_outer = 0.5;
  std::vector<double> cutoffs;  // τ_k, strictly decreasing; empty means default_cutoffs()

  // d >= 2, δ in (0, 1/2), p >= 1 and p != d/(d-1), cutoffs decreasing in (0, 1/8).
  void validate() const;
  double critical_exponent() const { return dimension / (dimension - 1.0); }
  bool supercritical() const { return p > critical_exponent(); }
};

// τ_k = 2^{-k}/8, k = 3..256.
std::vector<double> default_cutoffs(int k_from = 3, int k_to = 256);

// |x| < 1e-12 returns the value at |x| = 1e-12.
AnalyticField pathological_field(int d);

// L_k = ∫_{τ_k < |y| < 1/8} |u(x)-u(y)|^p / |x-y|^p · δ|x-y|^{δ-1} dy as a
// LowerBound report over the cutoff ladder.
ConvergenceReport divergence_probe(const PathologyCase& c, const Vec& probe, const ClassifierConfig& config = {});
// Same ladder with u replaced by `control`.
ConvergenceReport divergence_probe(const PathologyCase& c, const AnalyticField& control, const Vec& probe,
                                   const ClassifierConfig& config = {});

struct ScanEntry {
  double p;
  Classification classification;
  ConvergenceReport report;
};
std::vector<ScanEntry> threshold_scan(int d, double delta, const Vec& probe, const std::vector<double>& p_ladder,
                                      const std::optional<AnalyticField>& control = std::nullopt);

// min of δ t^{δ-1} over 1/8 <= t <= 5/8, the range of |x-y| for
// |y| < 1/8 and 1/4 < |x| < 1/2.
double mollifier_lower_bound(double delta);

}  // namespace bbm
