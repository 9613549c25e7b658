#include "bbm/mollifier.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "bbm/constants.hpp"
#include "bbm/error.hpp"
#include "bbm/gauss.hpp"

namespace bbm {

struct RadialMollifier::CustomState {
  std::function<double(double)> evaluator;
  double support = 0.0;
  std::once_flag checked;
  std::string failure;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dimension(int d) {
  if (d < 1 || d > 3) throw UnsupportedError("mollifier dimension must be 1, 2 or 3");
}

// ∫_S^∞ s^d e^{-s²} ds
double gaussian_moment_tail(int d, double s) {
  const double e = std::exp(-s * s);
  switch (d) {
    case 1: return 0.5 * e;
    case 2: return 0.5 * s * e + 0.25 * std::sqrt(std::numbers::pi) * std::erfc(s);
    default: return 0.5 * (s * s + 1.0) * e;
  }
}

}  // namespace

std::string to_string(MollifierKind kind) {
  switch (kind) {
    case MollifierKind::Indicator: return "indicator";
    case MollifierKind::Gaussian: return "gaussian";
    case MollifierKind::PowerLaw: return "powerlaw";
    case MollifierKind::Custom: return "custom";
  }
  return "unknown";
}

double gaussian_truncation(int d, double n, double rel_tail) {
  const double total = gaussian_moment_tail(d, 0.0);
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gaussian_moment_tail(d, mid) / total < rel_tail) hi = mid; else lo = mid;
  }
  return hi / std::sqrt(n);
}

RadialMollifier RadialMollifier::indicator(int d, double eps) {
  check_dimension(d);
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("indicator mollifier needs eps > 0");
  RadialMollifier m;
  m.dim_ = d;
  m.kind_ = MollifierKind::Indicator;
  m.param_ = eps;
  m.scale_ = d * std::pow(eps, -d);
  m.truncation_ = eps;
  return m;
}

RadialMollifier RadialMollifier::gaussian(int d, double n) {
  check_dimension(d);
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("gaussian mollifier needs n > 0");
  RadialMollifier m;
  m.dim_ = d;
  m.kind_ = MollifierKind::Gaussian;
  m.param_ = n;
  m.scale_ = gaussian_norm_const(d) * std::pow(n, 0.5 * (d + 1));
  m.truncation_ = gaussian_truncation(d, n);
  return m;
}

RadialMollifier RadialMollifier::power_law(int d, double delta, bool normalized) {
  check_dimension(d);
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("power-law mollifier needs 0 < delta < 1");
  RadialMollifier m;
  m.dim_ = d;
  m.kind_ = MollifierKind::PowerLaw;
  m.param_ = delta;
  m.normalized_ = normalized;
  m.scale_ = normalized ? (delta + d - 1.0) / delta : 1.0;
  m.truncation_ = 1.0;
  return m;
}

RadialMollifier RadialMollifier::custom(int d, std::function<double(double)> evaluator, double support_radius) {
  check_dimension(d);
  if (!evaluator) throw DomainError("custom mollifier needs an evaluator");
  if (!(support_radius > 0.0)) throw DomainError("custom mollifier needs a positive support radius");
  RadialMollifier m;
  m.dim_ = d;
  m.kind_ = MollifierKind::Custom;
  m.param_ = support_radius;
  m.truncation_ = support_radius;
  m.custom_ = std::make_shared<CustomState>();
  m.custom_->evaluator = std::move(evaluator);
  m.custom_->support = support_radius;
  return m;
}

double RadialMollifier::evaluate(double r) const {
  if (!(r > 0.0)) throw DomainError("mollifier evaluated at r <= 0");
  switch (kind_) {
    case MollifierKind::Indicator:
      return r < param_ ? scale_ : 0.0;
    case MollifierKind::Gaussian:
      return scale_ * r * std::exp(-param_ * r * r);
    case MollifierKind::PowerLaw:
      return r < 1.0 ? scale_ * param_ * std::pow(r, param_ - 1.0) : 0.0;
    case MollifierKind::Custom:
      return r < custom_->support ? custom_->evaluator(r) : 0.0;
  }
  return 0.0;
}

double RadialMollifier::support_radius() const {
  return kind_ == MollifierKind::Gaussian ? kInf : truncation_;
}

double RadialMollifier::quadrature_radius() const { return truncation_; }

RadialMollifier::Nodes RadialMollifier::measure_nodes(int level, int order, const std::vector<double>& cuts) const {
  if (level < 0) throw DomainError("radial level must be >= 0");
  const int panels = 1 << level;
  std::vector<double> tc;  // cuts in the integration variable
  Nodes out;
  std::vector<double> t, wt;
  const int d1 = dim_ - 1;
  if (kind_ == MollifierKind::PowerLaw) {
    // r = s^{1/δ} turns δ r^{δ-1} dr into ds
    for (double c : cuts) tc.push_back(std::pow(c, param_));
    append_composite_gl(0.0, 1.0, panels, order, t, wt, tc);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = std::pow(t[i], 1.0 / param_);
      out.r.push_back(r);
      out.w.push_back(scale_ * wt[i] * std::pow(r, d1));
    }
    return out;
  }
  if (kind_ == MollifierKind::Custom && !std::isfinite(truncation_)) {
    for (double c : cuts) tc.push_back(c / (1.0 + c));
    append_composite_gl(0.0, 1.0, panels, order, t, wt, tc);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = t[i] / (1.0 - t[i]);
      const double jac = 1.0 / ((1.0 - t[i]) * (1.0 - t[i]));
      out.r.push_back(r);
      out.w.push_back(wt[i] * jac * evaluate(r) * std::pow(r, d1));
    }
    return out;
  }
  append_composite_gl(0.0, truncation_, panels, order, t, wt, cuts);
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.r.push_back(t[i]);
    out.w.push_back(wt[i] * evaluate(t[i]) * std::pow(t[i], d1));
  }
  return out;
}

double RadialMollifier::integrate(const std::function<double(double)>& g, int level) const {
  const Nodes nodes = measure_nodes(level);
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.r.size(); ++i) sum += nodes.w[i] * g(nodes.r[i]);
  return sum;
}

namespace {

double refine_until_stable(const std::function<double(int)>& at_level, const RefinementPolicy& policy,
                           const std::string& what) {
  double prev = at_level(0);
  int stable = 0;
  for (int level = 1; level <= policy.max_levels; ++level) {
    const double cur = at_level(level);
    const double scale = std::max(std::abs(cur), 1e-300);
    if (std::abs(cur - prev) <= policy.rel_tol * scale) {
      if (++stable >= 2) return cur;
    } else {
      stable = 0;
    }
    prev = cur;
  }
  throw IntegrationError(what + ": radial quadrature did not converge within " +
                         std::to_string(policy.max_levels) + " levels");
}

}  // namespace

double RadialMollifier::normalization(const RefinementPolicy& policy) const {
  return refine_until_stable([&](int level) { return integrate([](double) { return 1.0; }, level); }, policy,
                             "normalization(" + label() + ")");
}

double RadialMollifier::tail_mass(double cut, const RefinementPolicy& policy) const {
  if (!(cut > 0.0)) throw DomainError("tail_mass needs a positive cut");
  const int d1 = dim_ - 1;
  auto at_level = [&](int level) {
    const int panels = 1 << level;
    std::vector<double> t, wt;
    double sum = 0.0;
    if (kind_ == MollifierKind::PowerLaw) {
      if (cut >= 1.0) return 0.0;
      append_composite_gl(std::pow(cut, param_), 1.0, panels, 8, t, wt);
      for (std::size_t i = 0; i < t.size(); ++i) sum += scale_ * wt[i] * std::pow(std::pow(t[i], 1.0 / param_), d1);
      return sum;
    }
    double hi = truncation_;
    if (kind_ == MollifierKind::Gaussian) hi = std::max(truncation_, cut + gaussian_truncation(dim_, param_));
    if (!std::isfinite(hi)) {
      // map (cut, ∞) to (0, 1)
      append_composite_gl(0.0, 1.0, panels, 8, t, wt);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = cut + t[i] / (1.0 - t[i]);
        sum += wt[i] / ((1.0 - t[i]) * (1.0 - t[i])) * evaluate(r) * std::pow(r, d1);
      }
      return sum;
    }
    if (cut >= hi) return 0.0;
    append_composite_gl(cut, hi, panels, 8, t, wt);
    for (std::size_t i = 0; i < t.size(); ++i) sum += wt[i] * evaluate(t[i]) * std::pow(t[i], d1);
    return sum;
  };
  RefinementPolicy p = policy;
  // tails can be exactly zero; treat absolute agreement as convergence
  double prev = at_level(0);
  int stable = 0;
  for (int level = 1; level <= p.max_levels; ++level) {
    const double cur = at_level(level);
    if (std::abs(cur - prev) <= p.rel_tol * std::abs(cur) || std::abs(cur - prev) < 1e-300) {
      if (++stable >= 2) return cur;
    } else {
      stable = 0;
    }
    prev = cur;
  }
  throw IntegrationError("tail_mass(" + label() + "): radial quadrature did not converge");
}

bool RadialMollifier::is_nonincreasing(int probes) const {
  if (probes < 2) throw DomainError("is_nonincreasing needs at least 2 probes");
  const double hi = quadrature_radius() < kInf ? quadrature_radius() : 50.0;
  const double lo = hi * 1e-6;
  double prev = evaluate(lo);
  for (int i = 1; i < probes; ++i) {
    const double r = lo * std::pow(hi / lo, static_cast<double>(i) / (probes - 1));
    const double v = evaluate(r);
    if (v > prev * (1.0 + 1e-14)) return false;
    prev = v;
  }
  return true;
}

void RadialMollifier::validate() const {
  if (kind_ != MollifierKind::Custom) return;
  std::call_once(custom_->checked, [this] {
    try {
      const double mass = normalization();
      if (std::abs(mass - 1.0) > 1e-8) {
        std::ostringstream msg;
        msg << "custom mollifier is not normalized: mass " << mass;
        custom_->failure = msg.str();
      }
    } catch (const IntegrationError& e) {
      custom_->failure = e.what();
    }
  });
  if (!custom_->failure.empty()) throw IntegrationError(custom_->failure);
}

std::string RadialMollifier::label() const {
  std::ostringstream s;
  s << to_string(kind_) << "(d=" << dim_ << ", " << param_;
  if (kind_ == MollifierKind::PowerLaw && normalized_) s << ", normalized";
  s << ")";
  return s.str();
}

nlohmann::json RadialMollifier::to_json() const {
  if (kind_ == MollifierKind::Custom) throw UnsupportedError("custom mollifiers do not serialize");
  return {{"kind", to_string(kind_)}, {"dimension", dim_}, {"param", param_}, {"normalized", normalized_}};
}

RadialMollifier RadialMollifier::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int d = j.at("dimension").get<int>();
  const double param = j.at("param").get<double>();
  if (kind == "indicator") return indicator(d, param);
  if (kind == "gaussian") return gaussian(d, param);
  if (kind == "powerlaw") return power_law(d, param, j.value("normalized", false));
  throw DomainError("unknown mollifier kind '" + kind + "'");
}

}  // namespace bbm
