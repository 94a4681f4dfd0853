#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "mgvol/anamorphosis.hpp"
#include "mgvol/kriging.hpp"

namespace mgvol {

/// Variances below this are treated as exactly zero (point mass at phi(y*)).
inline constexpr double kDegenerateVariance = 1e-12;

/// Conditional law of the raw variable at one location:
/// Z | data = phi(Y), Y ~ N(y_star, sigma2_sk).
struct PointLaw {
  const Anamorphosis* anamorphosis = nullptr;
  double y_star = 0.0;
  double sigma2_sk = 1.0;

  PointLaw() = default;
  PointLaw(const Anamorphosis& a, double y_star, double sigma2_sk);

  double sigma() const;
  bool degenerate() const { return sigma2_sk < kDegenerateVariance; }
};

/// Nodes of a kriged grid averaged with uniform weights.
struct VolumeSpec {
  std::vector<std::size_t> nodes;

  VolumeSpec() = default;
  explicit VolumeSpec(std::vector<std::size_t> nodes);

  std::size_t size() const { return nodes.size(); }
  /// Throws InputError unless nonempty, unique and below node_count.
  void validate(std::size_t node_count) const;

  /// Splits the grid into bx x by x bz node blocks (ragged edges dropped).
  static std::vector<VolumeSpec> tile(const Grid& grid, std::size_t bx, std::size_t by,
                                      std::size_t bz = 1);
};

/// Raw density f(z) = g_{y*}^{s2}(phi^{-1}(z)) / phi'(phi^{-1}(z)); 0 outside
/// the support. Throws DegenerateLaw for a point mass.
double point_pdf(const PointLaw& law, double z);
/// G((phi^{-1}(z) - y*) / sigma). Throws DegenerateLaw for a point mass.
double point_cdf(const PointLaw& law, double z);
/// phi(y* + sigma G^{-1}(p)); defined for point masses as well.
double point_quantile(const PointLaw& law, double p);

/// E[Z^n | data] by Gauss-Hermite quadrature after y = sigma t + y*,
/// starting at 128 nodes and doubling until successive orders agree to 1e-8
/// (QuadratureFailure past 1024 nodes).
double conditional_moment(const PointLaw& law, int order);
double conditional_mean(const PointLaw& law);
double conditional_variance(const PointLaw& law);

/// Cov(Z_i, Z_j | data) for Gaussian error covariance rho_sk, by a 128x128
/// tensor Gauss-Hermite rule on the Cholesky-whitened pair.
double pair_covariance(const PointLaw& law_i, const PointLaw& law_j, double rho_sk);

/// Memo of node-pair covariances shared between overlapping volumes.
class PairCovarianceCache {
 public:
  bool find(std::size_t i, std::size_t j, double& value) const;
  void store(std::size_t i, std::size_t j, double value);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::size_t, std::size_t>, double> values_;
};

/// Conditional variance of the volume average:
/// (1/|V|^2) sum_{i,j} Cov(Z(u_i), Z(u_j) | data).
double volume_variance(const KrigedField& field, const VolumeSpec& volume, const Anamorphosis& a,
                       PairCovarianceCache* cache = nullptr);

PointLaw node_law(const KrigedField& field, std::size_t node, const Anamorphosis& a);

std::vector<double> conditional_mean_map(const KrigedField& field, const Anamorphosis& a);
std::vector<double> conditional_variance_map(const KrigedField& field, const Anamorphosis& a);

}  // namespace mgvol
