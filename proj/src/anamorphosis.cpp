#include "mgvol/anamorphosis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mgvol/error.hpp"
#include "mgvol/normal.hpp"
#include "mgvol/quadrature.hpp"

namespace mgvol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kCoefficientRuleOrder = 512;
constexpr double kCheckHalfWidth = 8.0;
constexpr int kCheckIntervals = 10000;

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Index of the segment [k, k+1] of `xs` containing x; xs has >= 2 entries.
std::size_t segment(const std::vector<double>& xs, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t k = std::size_t(it - xs.begin());
  if (k == 0) return 0;
  return std::min(k - 1, xs.size() - 2);
}

double lerp_table(const std::vector<double>& from, const std::vector<double>& to, double x) {
  const std::size_t k = segment(from, x);
  const double t = (x - from[k]) / (from[k + 1] - from[k]);
  return to[k] + t * (to[k + 1] - to[k]);
}

}  // namespace

Anamorphosis::Anamorphosis(FormData form) : form_(std::move(form)) {}

Anamorphosis Anamorphosis::lognormal(double mu, double sigma) {
  if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma))
    throw InputError("lognormal anamorphosis needs finite mu and sigma > 0");
  Anamorphosis a(Lognormal{mu, sigma});
  a.lower_ = 0.0;
  a.upper_ = kInf;
  return a;
}

Anamorphosis Anamorphosis::exponential(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InputError("exponential anamorphosis needs lambda > 0");
  Anamorphosis a(Exponential{lambda});
  a.lower_ = 0.0;
  a.upper_ = kInf;
  return a;
}

Anamorphosis Anamorphosis::empirical(std::vector<double> z, std::vector<double> y, double z_min,
                                     double z_max) {
  if (z.size() != y.size() || z.size() < 2)
    throw DegenerateData("empirical table needs at least two rows");
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (!std::isfinite(z[k]) || !std::isfinite(y[k]))
      throw InputError("non-finite empirical table entry");
    if (k > 0 && !(z[k] > z[k - 1] && y[k] > y[k - 1]))
      throw NotMonotone("empirical table must be strictly increasing in z and y");
  }
  if (!(z_min < z.front()) || !(z_max > z.back()))
    throw InputError("empirical bounds must satisfy z_min < first z and z_max > last z (got " +
                     num(z_min) + ", " + num(z_max) + ")");
  Anamorphosis a(Empirical{std::move(z), std::move(y), z_min, z_max});
  a.lower_ = z_min;
  a.upper_ = z_max;
  return a;
}

Anamorphosis Anamorphosis::hermite(HermiteSeries series, double min_half_width) {
  const double step = 2.0 * kCheckHalfWidth / kCheckIntervals;
  std::vector<double> values(kCheckIntervals + 1);
  for (int i = 0; i <= kCheckIntervals; ++i)
    values[std::size_t(i)] = series.value(-kCheckHalfWidth + step * i);
  const int mid = kCheckIntervals / 2;
  int hi = mid;
  while (hi < kCheckIntervals && values[std::size_t(hi + 1)] > values[std::size_t(hi)]) ++hi;
  int lo = mid;
  while (lo > 0 && values[std::size_t(lo - 1)] < values[std::size_t(lo)]) --lo;
  const double y_lo = -kCheckHalfWidth + step * lo;
  const double y_hi = -kCheckHalfWidth + step * hi;
  if (hi == mid || lo == mid || y_hi < min_half_width - 1e-12 || y_lo > -min_half_width + 1e-12)
    throw NotMonotone("Hermite series increases only on [" + num(y_lo) + ", " + num(y_hi) +
                      "], need at least [-" + num(min_half_width) + ", " + num(min_half_width) +
                      "]");
  Anamorphosis a(Hermite{std::move(series), y_lo, y_hi});
  a.z_lo_ = values[std::size_t(lo)];
  a.z_hi_ = values[std::size_t(hi)];
  a.slope_lo_ = (values[std::size_t(lo + 1)] - values[std::size_t(lo)]) / step;
  a.slope_hi_ = (values[std::size_t(hi)] - values[std::size_t(hi - 1)]) / step;
  a.lower_ = -kInf;
  a.upper_ = kInf;
  return a;
}

Anamorphosis::Form Anamorphosis::form() const { return Form(form_.index()); }

std::string Anamorphosis::describe() const {
  if (auto f = as_lognormal()) return "lognormal(mu=" + num(f->mu) + ", sigma=" + num(f->sigma) + ")";
  if (auto f = as_exponential()) return "exponential(lambda=" + num(f->lambda) + ")";
  if (auto f = as_empirical())
    return "empirical(" + std::to_string(f->z.size()) + " rows, z in [" + num(f->z_min) + ", " +
           num(f->z_max) + "])";
  const auto* h = as_hermite();
  return "hermite(P=" + std::to_string(h->series.degree()) + ")";
}

double Anamorphosis::backward(double y) const {
  if (auto f = as_lognormal()) return std::exp(f->mu + f->sigma * y);
  if (auto f = as_exponential()) return -normal::log_sf(y) / f->lambda;
  if (auto f = as_empirical()) {
    if (y < f->y.front())
      return f->z_min + (f->z.front() - f->z_min) * normal::cdf(y) / normal::cdf(f->y.front());
    if (y > f->y.back())
      return f->z_max - (f->z_max - f->z.back()) * normal::sf(y) / normal::sf(f->y.back());
    return lerp_table(f->y, f->z, y);
  }
  const auto* h = as_hermite();
  if (y < h->y_lo) return z_lo_ + slope_lo_ * (y - h->y_lo);
  if (y > h->y_hi) return z_hi_ + slope_hi_ * (y - h->y_hi);
  return h->series.value(y);
}

double Anamorphosis::derivative(double y) const {
  if (auto f = as_lognormal()) return f->sigma * std::exp(f->mu + f->sigma * y);
  if (auto f = as_exponential()) return std::exp(normal::log_pdf(y) - normal::log_sf(y)) / f->lambda;
  if (auto f = as_empirical()) {
    if (y < f->y.front())
      return (f->z.front() - f->z_min) * normal::pdf(y) / normal::cdf(f->y.front());
    if (y > f->y.back())
      return (f->z_max - f->z.back()) * normal::pdf(y) / normal::sf(f->y.back());
    const std::size_t k = segment(f->y, y);
    return (f->z[k + 1] - f->z[k]) / (f->y[k + 1] - f->y[k]);
  }
  const auto* h = as_hermite();
  if (y < h->y_lo) return slope_lo_;
  if (y > h->y_hi) return slope_hi_;
  return h->series.derivative(y);
}

double Anamorphosis::forward(double z) const {
  if (!(z > lower_ && z < upper_) || std::isnan(z))
    throw OutOfSupport("raw value " + num(z) + " outside (" + num(lower_) + ", " + num(upper_) +
                       ") of " + describe());
  if (auto f = as_lognormal()) return (std::log(z) - f->mu) / f->sigma;
  if (auto f = as_exponential()) {
    const double lz = f->lambda * z;
    const double p = -std::expm1(-lz);
    if (p < 0.5) return normal::quantile(p);
    const double q = std::exp(-lz);
    if (q > 0.0) return normal::quantile_sf(q);
    // Survival below the double range: Newton on log_sf(y) = -lz.
    double y = std::sqrt(2.0 * lz);
    for (int it = 0; it < 50; ++it) {
      const double step = (normal::log_sf(y) + lz) / std::exp(normal::log_pdf(y) - normal::log_sf(y));
      y += step;
      if (std::abs(step) <= 1e-15 * y) break;
    }
    return y;
  }
  if (auto f = as_empirical()) {
    if (z < f->z.front())
      return normal::quantile(normal::cdf(f->y.front()) * (z - f->z_min) /
                              (f->z.front() - f->z_min));
    if (z > f->z.back())
      return normal::quantile_sf(normal::sf(f->y.back()) * (f->z_max - z) /
                                 (f->z_max - f->z.back()));
    return lerp_table(f->z, f->y, z);
  }
  const auto* h = as_hermite();
  if (z < z_lo_) return h->y_lo + (z - z_lo_) / slope_lo_;
  if (z > z_hi_) return h->y_hi + (z - z_hi_) / slope_hi_;
  // Safeguarded Newton on the verified increasing stretch.
  double a = h->y_lo, b = h->y_hi;
  double y = a + (b - a) * (z - z_lo_) / (z_hi_ - z_lo_);
  for (int it = 0; it < 200; ++it) {
    const double r = h->series.value(y) - z;
    if (r > 0.0) b = y; else a = y;
    const double d = h->series.derivative(y);
    double next = (d > 0.0) ? y - r / d : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - y) <= 1e-15 * (1.0 + std::abs(y)) || b - a <= 1e-15) return next;
    y = next;
  }
  return y;
}

double Anamorphosis::raw_cdf(double z) const {
  if (z <= lower_) return 0.0;
  if (z >= upper_) return 1.0;
  return normal::cdf(forward(z));
}

Anamorphosis fit_empirical(std::span<const double> values, std::span<const double> weights,
                           std::optional<double> z_min, std::optional<double> z_max) {
  const std::size_t n = values.size();
  if (n < 2) throw DegenerateData("need at least two values");
  if (!weights.empty() && weights.size() != n)
    throw InputError("weights and values differ in length");
  std::vector<double> w(n, 1.0 / double(n));
  if (!weights.empty()) {
    double total = 0.0;
    for (double wi : weights) {
      if (!(wi >= 0.0) || !std::isfinite(wi)) throw InputError("weights must be >= 0");
      total += wi;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("weights must sum to 1");
    for (std::size_t i = 0; i < n; ++i) w[i] = weights[i] / total;
  }
  for (double v : values)
    if (!std::isfinite(v)) throw InputError("non-finite sample value");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  if (values[order.front()] == values[order.back()])
    throw DegenerateData("all values equal");

  std::vector<double> zs, ys;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < n;) {
    std::size_t end = k;
    double score_sum = 0.0;
    double score_weight = 0.0;
    while (end < n && values[order[end]] == values[order[k]]) {
      const double wi = w[order[end]];
      const double p = cumulative + 0.5 * wi;
      cumulative += wi;
      if (wi > 0.0) {
        score_sum += wi * normal::quantile(std::clamp(p, 1e-300, 1.0 - 1e-16));
        score_weight += wi;
      }
      ++end;
    }
    if (score_weight > 0.0) {
      zs.push_back(values[order[k]]);
      ys.push_back(score_sum / score_weight);
    }
    k = end;
  }
  if (zs.size() < 2) throw DegenerateData("fewer than two distinct values with positive weight");

  const double lo = zs.front();
  const double hi = zs.back();
  double zmin_value;
  if (z_min) {
    zmin_value = *z_min;
  } else {
    zmin_value = lo - 0.5 * (zs[1] - zs[0]);
    if (lo > 0.0) zmin_value = std::max(zmin_value, 0.0);
  }
  double zmax_value;
  if (z_max) {
    zmax_value = *z_max;
  } else {
    zmax_value = hi > 0.0 ? 1.5 * hi : hi + 0.5 * (hi - lo);
  }
  return Anamorphosis::empirical(std::move(zs), std::move(ys), zmin_value, zmax_value);
}

std::vector<double> hermite_coefficients(const std::function<double(double)>& f, int degree) {
  if (degree < 0 || degree > kMaxHermiteDegree) throw InputError("bad Hermite degree");
  const auto& rule = gauss_hermite(kCoefficientRuleOrder);
  std::vector<double> coeffs(std::size_t(degree) + 1, 0.0);
  std::vector<double> h(coeffs.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double fx = f(rule.nodes[i]);
    hermite_batch(degree, rule.nodes[i], h);
    const double wf = rule.weights[i] * fx;
    for (std::size_t n = 0; n < coeffs.size(); ++n) coeffs[n] += wf * h[n];
  }
  return coeffs;
}

Anamorphosis fit_hermite(const Anamorphosis& a, int degree) {
  if (degree < 1) throw InputError("Hermite degree must be >= 1");
  auto coeffs = hermite_coefficients([&](double y) { return a.backward(y); }, degree);
  if (std::abs(coeffs.back()) > std::abs(coeffs[1]))
    throw QuadratureFailure("Hermite coefficients do not decay (|phi_P| > |phi_1|)");
  return Anamorphosis::hermite(HermiteSeries(std::move(coeffs)));
}

}  // namespace mgvol
