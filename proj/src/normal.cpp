#include "mgvol/normal.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>

namespace mgvol::normal {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880168872421;
constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

// Asymptotic expansion of log(1 - G(y)) for large positive y, where erfc
// underflows. Truncation error is below 1e-12 for y >= 30.
double log_sf_asymptotic(double y) {
  const double r = 1.0 / (y * y);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * y * y - std::log(y) - kLogSqrt2Pi + std::log(series);
}

}  // namespace

double pdf(double y) { return kInvSqrt2Pi * std::exp(-0.5 * y * y); }

double log_pdf(double y) { return -0.5 * y * y - kLogSqrt2Pi; }

double cdf(double y) { return 0.5 * std::erfc(-y / kSqrt2); }

double sf(double y) { return 0.5 * std::erfc(y / kSqrt2); }

double log_sf(double y) {
  if (y < 0.0) return std::log1p(-cdf(y));
  if (y < 30.0) return std::log(sf(y));
  return log_sf_asymptotic(y);
}

double log_cdf(double y) { return log_sf(-y); }

double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double quantile_sf(double q) { return -quantile(q); }

}  // namespace mgvol::normal
