#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgvol/geometry.hpp"

namespace mgvol {

enum class StructureKind { nugget, spherical, exponential, gaussian };

/// One nested structure. Ranges are (major, minor, vertical); exponential and
/// gaussian use the practical-range convention (95% of the sill reached at
/// the range). Angles are azimuth, dip, rake in degrees, GSLIB convention.
struct Structure {
  StructureKind kind = StructureKind::spherical;
  double sill = 0.0;
  std::array<double, 3> ranges{1.0, 1.0, 1.0};
  std::array<double, 3> angles{0.0, 0.0, 0.0};
};

/// Stationary covariance C(h) built from nested structures. Immutable.
class CovarianceModel {
 public:
  static constexpr double kDefaultDuplicateTolerance = 1e-9;

  explicit CovarianceModel(std::vector<Structure> structures,
                           double duplicate_tolerance = kDefaultDuplicateTolerance);

  /// Parses e.g. "0.1 nugget + 0.9 sph(100)" or "1 exp(120,40; 30,0,0)".
  static CovarianceModel parse(std::string_view text);

  double operator()(const Point& a, const Point& b) const;

  double total_sill() const { return total_sill_; }
  double duplicate_tolerance() const { return duplicate_tolerance_; }
  const std::vector<Structure>& structures() const { return structures_; }
  std::string to_string() const;

 private:
  struct Compiled {
    StructureKind kind;
    double sill;
    // Rows scaled by the inverse ranges: |transform * h| is the reduced lag.
    Eigen::Matrix3d transform;
  };

  std::vector<Structure> structures_;
  std::vector<Compiled> compiled_;
  double total_sill_ = 0.0;
  double duplicate_tolerance_;
};

double cov(const CovarianceModel& model, const Point& a, const Point& b);

/// Covariance matrix between all pairs of points. Throws DuplicatePoints when
/// two points are within the model's duplicate tolerance.
Eigen::MatrixXd cov_matrix(const CovarianceModel& model, std::span<const Point> points);

/// Rectangular covariance block C(rows[i], cols[j]); no duplicate check.
Eigen::MatrixXd cross_cov_matrix(const CovarianceModel& model, std::span<const Point> rows,
                                 std::span<const Point> cols);

/// Lower Cholesky factor with diagonal jitter escalation: no jitter first,
/// then 1e-10 * scale growing tenfold up to 1e-6 * scale.
struct JitteredCholesky {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Returns false (leaving `out` untouched) when no jitter level succeeds.
bool cholesky_with_jitter(const Eigen::MatrixXd& matrix, double scale, JitteredCholesky& out);

}  // namespace mgvol
