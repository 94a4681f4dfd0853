#include "mgvol/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mgvol/error.hpp"

namespace mgvol {

namespace {

void require_same_size(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("series lengths differ");
  if (x.empty()) throw InputError("empty series");
}

}  // namespace

double sample_mean(std::span<const double> x) {
  if (x.empty()) throw InputError("empty series");
  double sum = 0.0;
  for (double v : x) sum += v;
  return sum / double(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw InputError("variance needs at least two values");
  const double m = sample_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / double(x.size() - 1);
}

double sample_variance_se(std::span<const double> x) {
  const double n = double(x.size());
  if (n < 4) throw InputError("variance standard error needs at least four values");
  const double m = sample_mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  const double s2 = m2 * n / (n - 1.0);
  return std::sqrt(std::max(0.0, (m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_size(x, y);
  const double mx = sample_mean(x), my = sample_mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 && syy == 0.0) return 1.0;
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double mean_relative_deviation(std::span<const double> analytic, std::span<const double> simulated) {
  require_same_size(analytic, simulated);
  double sum = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (analytic[i] == 0.0) throw InputError("relative deviation against a zero reference");
    sum += std::abs(simulated[i] - analytic[i]) / std::abs(analytic[i]);
  }
  return sum / double(analytic.size());
}

double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InputError("empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = double(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, std::abs(f - double(i) / n), std::abs(double(i + 1) / n - f)});
  }
  return d;
}

}  // namespace mgvol
