#pragma once

#include <span>
#include <vector>

namespace mgvol {

// Normalized Hermite polynomials in the sign convention H_0 = 1, H_1(y) = -y,
// orthonormal under the standard Gaussian density g.

inline constexpr int kMaxHermiteDegree = 300;

/// H_n(y) by the three-term recurrence.
double hermite_eval(int n, double y);

/// H_0(y) .. H_N(y), same recurrence path as hermite_eval.
std::vector<double> hermite_batch(int max_degree, double y);
void hermite_batch(int max_degree, double y, std::span<double> out);

/// h_k = (1 - b^2)^{k/2} H_k(a / sqrt(1 - b^2)) for k = 0..p, computed by a
/// recurrence that never divides by sqrt(1 - b^2) and is exact at b = 1.
std::vector<double> hermite_scaled_batch(int p, double a, double b);

/// Coefficients c_0..c_p with H_p(a + b y) = sum_n c_n H_n(y), 0 <= b <= 1.
std::vector<double> shift_stretch(int p, double a, double b);

/// Truncated expansion phi(y) = sum_{n<=P} phi_n H_n(y).
class HermiteSeries {
 public:
  HermiteSeries() = default;
  explicit HermiteSeries(std::vector<double> coefficients);

  int degree() const { return int(coefficients_.size()) - 1; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double operator[](int n) const { return coefficients_[std::size_t(n)]; }

  double value(double y) const;
  /// phi'(y) = -sum_{p>=1} phi_p sqrt(p) H_{p-1}(y)
  double derivative(double y) const;

 private:
  std::vector<double> coefficients_{0.0};
};

/// E[phi(Y)] for Y ~ N(y_star, sigma_sk^2), summed in closed form:
/// sum_p phi_p (1 - sigma^2)^{p/2} H_p(y_star / sqrt(1 - sigma^2)).
double hermite_conditional_mean(const HermiteSeries& series, double y_star, double sigma_sk);

}  // namespace mgvol
