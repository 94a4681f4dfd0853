#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

#include "mgvol/anamorphosis.hpp"
#include "mgvol/covariance.hpp"
#include "mgvol/geometry.hpp"

namespace mgvol {

/// Conditioning data: positions with raw values and their Gaussian scores.
struct SampleSet {
  std::vector<Point> positions;
  std::vector<double> raw;
  std::vector<double> scores;

  std::size_t size() const { return positions.size(); }

  /// Scores computed as forward(a, raw).
  static SampleSet from_raw(std::vector<Point> positions, std::vector<double> raw,
                            const Anamorphosis& a);
  /// Raw values computed as backward(a, score).
  static SampleSet from_scores(std::vector<Point> positions, std::vector<double> scores,
                               const Anamorphosis& a);
};

struct KrigeEstimate {
  double y_star = 0.0;
  double sigma2_sk = 1.0;
};

/// Simple kriging (zero mean) of a single target with the global neighborhood.
KrigeEstimate simple_krige(const SampleSet& samples, const CovarianceModel& model,
                           const Point& target);

struct KrigingOptions {
  /// 0 = all samples (global neighborhood). A positive cap krige each node
  /// from its nearest samples only; node means and variances follow the cap
  /// but cross-covariances keep using the global system, so matrices built
  /// from them are no longer guaranteed PSD.
  std::size_t max_samples = 0;
};

/// Simple kriging of every grid node, with the sample covariance factorized
/// once and kept for error cross-covariance queries. Immutable.
class KrigedField {
 public:
  KrigedField(const SampleSet& samples, const CovarianceModel& model, const Grid& grid,
              KrigingOptions options = {});

  const Grid& grid() const { return grid_; }
  const CovarianceModel& model() const { return model_; }
  const SampleSet& samples() const { return samples_; }
  std::size_t node_count() const { return grid_.node_count(); }

  double y_star(std::size_t node) const { return y_star_[node]; }
  double sigma2(std::size_t node) const { return sigma2_[node]; }
  std::span<const double> y_star_map() const { return y_star_; }
  std::span<const double> sigma2_map() const { return sigma2_; }

  /// Nodes whose variance needed clamping by more than 1e-8.
  std::size_t clamp_warnings() const { return clamp_warnings_; }
  double jitter() const { return jitter_; }

  /// Kriging at an arbitrary point with the stored factorization.
  KrigeEstimate estimate(const Point& target) const;

  /// sigma_SK(u_i, u_j) = C(u_i - u_j) - k_i' C^{-1} k_j.
  double cross_covariance(const Point& a, const Point& b) const;
  double node_cross_covariance(std::size_t i, std::size_t j) const;
  /// Sigma_SK restricted to the given nodes.
  Eigen::MatrixXd cross_covariance_matrix(std::span<const std::size_t> nodes) const;

 private:
  Eigen::VectorXd half_weights(const Point& target) const;

  Grid grid_;
  CovarianceModel model_;
  SampleSet samples_;
  Eigen::MatrixXd lower_;         // Cholesky factor of the sample covariance
  Eigen::VectorXd half_scores_;   // L^{-1} y
  Eigen::MatrixXd node_weights_;  // column i = L^{-1} k_i
  std::vector<double> y_star_;
  std::vector<double> sigma2_;
  std::size_t clamp_warnings_ = 0;
  double jitter_ = 0.0;
};

KrigedField krige_field(const SampleSet& samples, const CovarianceModel& model, const Grid& grid,
                        KrigingOptions options = {});

double sk_cross_covariance(const KrigedField& field, const Point& a, const Point& b);

}  // namespace mgvol
