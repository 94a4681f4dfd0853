#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mgvol/hermite.hpp"

namespace mgvol {

/// Gaussian anamorphosis z = phi(y): the increasing transfer function that
/// maps a standard Gaussian score to the raw variable. Immutable.
class Anamorphosis {
 public:
  enum class Form { lognormal, exponential, empirical, hermite };

  struct Lognormal {
    double mu = 0.0;
    double sigma = 1.0;
  };
  struct Exponential {
    double lambda = 1.0;
  };
  /// Rows (z_k, y_k) strictly increasing in both columns. Outside the table
  /// the raw cdf is linear from (z_min, 0) to the first row and from the
  /// last row to (z_max, 1).
  struct Empirical {
    std::vector<double> z;
    std::vector<double> y;
    double z_min = 0.0;
    double z_max = 0.0;
  };
  /// Series used on [y_lo, y_hi], where it was verified increasing; linear
  /// continuation with the end slopes outside.
  struct Hermite {
    HermiteSeries series;
    double y_lo = -8.0;
    double y_hi = 8.0;
  };

  static Anamorphosis lognormal(double mu, double sigma);
  static Anamorphosis exponential(double lambda);
  static Anamorphosis empirical(std::vector<double> z, std::vector<double> y, double z_min,
                                double z_max);
  /// Throws NotMonotone unless the series increases on at least
  /// [-min_half_width, min_half_width].
  static Anamorphosis hermite(HermiteSeries series, double min_half_width = 4.0);

  Form form() const;
  std::string describe() const;

  /// phi(y)
  double backward(double y) const;
  /// phi^{-1}(z); throws OutOfSupport outside the open support.
  double forward(double z) const;
  /// phi'(y) > 0
  double derivative(double y) const;
  /// F_Z(z) = G(phi^{-1}(z)), clamped to 0/1 outside the support.
  double raw_cdf(double z) const;

  /// Support of the raw variable; either bound may be infinite.
  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }

  const Lognormal* as_lognormal() const { return std::get_if<Lognormal>(&form_); }
  const Exponential* as_exponential() const { return std::get_if<Exponential>(&form_); }
  const Empirical* as_empirical() const { return std::get_if<Empirical>(&form_); }
  const Hermite* as_hermite() const { return std::get_if<Hermite>(&form_); }

 private:
  using FormData = std::variant<Lognormal, Exponential, Empirical, Hermite>;
  explicit Anamorphosis(FormData form);

  FormData form_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  // Hermite form only: series values and slopes at the validity ends.
  double z_lo_ = 0.0, z_hi_ = 0.0, slope_lo_ = 0.0, slope_hi_ = 0.0;
};

/// Normal-score table from raw samples. Plotting positions are the centered
/// cumulative weights; tied values share one row with the mean score.
/// Defaults: z_min just below the sample minimum (never below 0 for
/// nonnegative data), z_max = 1.5 x sample maximum.
Anamorphosis fit_empirical(std::span<const double> values, std::span<const double> weights = {},
                           std::optional<double> z_min = std::nullopt,
                           std::optional<double> z_max = std::nullopt);

/// phi_n = integral of f(y) H_n(y) g(y) dy, n = 0..degree, by 512-node
/// Gauss-Hermite quadrature.
std::vector<double> hermite_coefficients(const std::function<double(double)>& f, int degree);

/// Hermite-series form of an anamorphosis truncated at `degree`. Throws
/// QuadratureFailure when |phi_P| > |phi_1|.
Anamorphosis fit_hermite(const Anamorphosis& a, int degree);

}  // namespace mgvol
