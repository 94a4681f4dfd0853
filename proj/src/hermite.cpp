#include "mgvol/hermite.hpp"

#include <cmath>
#include <string>

#include "mgvol/error.hpp"

namespace mgvol {

namespace {

void check_degree(int n) {
  if (n < 0 || n > kMaxHermiteDegree)
    throw InputError("Hermite degree " + std::to_string(n) + " outside [0, " +
                     std::to_string(kMaxHermiteDegree) + "]");
}

void check_scale(double b) {
  if (!(b >= 0.0 && b <= 1.0))
    throw ScaleOutOfRange("stretch " + std::to_string(b) + " outside [0, 1]");
}

}  // namespace

void hermite_batch(int max_degree, double y, std::span<double> out) {
  check_degree(max_degree);
  out[0] = 1.0;
  if (max_degree == 0) return;
  out[1] = -y;
  for (int n = 1; n < max_degree; ++n) {
    const double k = double(n);
    out[std::size_t(n + 1)] =
        -(y * out[std::size_t(n)] + std::sqrt(k) * out[std::size_t(n - 1)]) / std::sqrt(k + 1.0);
  }
}

std::vector<double> hermite_batch(int max_degree, double y) {
  check_degree(max_degree);
  std::vector<double> out(std::size_t(max_degree) + 1);
  hermite_batch(max_degree, y, out);
  return out;
}

double hermite_eval(int n, double y) { return hermite_batch(n, y).back(); }

std::vector<double> hermite_scaled_batch(int p, double a, double b) {
  check_degree(p);
  check_scale(b);
  const double shrink = (1.0 - b) * (1.0 + b);
  std::vector<double> h(std::size_t(p) + 1);
  h[0] = 1.0;
  if (p == 0) return h;
  h[1] = -a;
  for (int k = 1; k < p; ++k) {
    const double kk = double(k);
    h[std::size_t(k + 1)] =
        -(a * h[std::size_t(k)] + shrink * std::sqrt(kk) * h[std::size_t(k - 1)]) /
        std::sqrt(kk + 1.0);
  }
  return h;
}

std::vector<double> shift_stretch(int p, double a, double b) {
  const auto h = hermite_scaled_batch(p, a, b);
  std::vector<double> c(std::size_t(p) + 1);
  const double lg_p = std::lgamma(double(p) + 1.0);
  double b_pow = 1.0;
  for (int n = 0; n <= p; ++n) {
    const double log_binom = lg_p - std::lgamma(double(n) + 1.0) - std::lgamma(double(p - n) + 1.0);
    c[std::size_t(n)] = std::exp(0.5 * log_binom) * b_pow * h[std::size_t(p - n)];
    b_pow *= b;
  }
  return c;
}

HermiteSeries::HermiteSeries(std::vector<double> coefficients)
    : coefficients_(std::move(coefficients)) {
  if (coefficients_.empty()) throw InputError("Hermite series needs at least one coefficient");
  check_degree(degree());
  for (double c : coefficients_)
    if (!std::isfinite(c)) throw InputError("non-finite Hermite coefficient");
}

double HermiteSeries::value(double y) const {
  std::vector<double> h(coefficients_.size());
  hermite_batch(degree(), y, h);
  double sum = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n) sum += coefficients_[n] * h[n];
  return sum;
}

double HermiteSeries::derivative(double y) const {
  if (degree() == 0) return 0.0;
  std::vector<double> h(coefficients_.size());
  hermite_batch(degree(), y, h);
  double sum = 0.0;
  for (std::size_t p = 1; p < h.size(); ++p)
    sum += coefficients_[p] * std::sqrt(double(p)) * h[p - 1];
  return -sum;
}

double hermite_conditional_mean(const HermiteSeries& series, double y_star, double sigma_sk) {
  check_scale(sigma_sk);
  const auto h = hermite_scaled_batch(series.degree(), y_star, sigma_sk);
  double sum = 0.0;
  for (std::size_t p = 0; p < h.size(); ++p) sum += series[int(p)] * h[p];
  return sum;
}

}  // namespace mgvol
