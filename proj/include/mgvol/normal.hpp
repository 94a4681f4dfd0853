#pragma once

// Standard Gaussian density, distribution and quantile functions, written to
// keep full relative precision in both tails.

namespace mgvol::normal {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

double pdf(double y);
double log_pdf(double y);
/// G(y)
double cdf(double y);
/// 1 - G(y), computed without cancellation.
double sf(double y);
/// log(1 - G(y)); finite for every finite y.
double log_sf(double y);
/// log G(y)
double log_cdf(double y);
/// G^{-1}(p) for p in (0, 1).
double quantile(double p);
/// y such that 1 - G(y) = q, for q in (0, 1).
double quantile_sf(double q);

}  // namespace mgvol::normal
