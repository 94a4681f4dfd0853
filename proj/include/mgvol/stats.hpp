#pragma once

#include <functional>
#include <span>

namespace mgvol {

double sample_mean(std::span<const double> x);
/// Unbiased sample variance.
double sample_variance(std::span<const double> x);
/// Standard error of the sample variance from the fourth central moment.
double sample_variance_se(std::span<const double> x);

double pearson(std::span<const double> x, std::span<const double> y);
/// mean_i |simulated_i - analytic_i| / |analytic_i|
double mean_relative_deviation(std::span<const double> analytic, std::span<const double> simulated);

/// Kolmogorov-Smirnov sup distance between the empirical cdf of `sample`
/// and a reference cdf.
double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf);

}  // namespace mgvol
