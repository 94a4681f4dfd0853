#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mgvol/conditional.hpp"

namespace mgvol {

/// Largest block handled by nested exact integration.
inline constexpr std::size_t kMaxExactNodes = 4;

/// Joint conditional law of n nodes averaged with uniform weights 1/n.
struct BlockLaw {
  std::vector<PointLaw> laws;
  Eigen::MatrixXd sigma;  // SK error covariance between the nodes

  std::size_t size() const { return laws.size(); }
};

/// Laws and error covariance of the volume's nodes. Throws NotPSD when the
/// covariance of the non-degenerate nodes cannot be factorized.
BlockLaw make_block_law(const KrigedField& field, const VolumeSpec& volume, const Anamorphosis& a);
BlockLaw make_block_law(const Anamorphosis& a, std::span<const double> y_star,
                        const Eigen::MatrixXd& sigma);

/// Monte-Carlo estimate with its standard error.
struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

struct McOptions {
  std::size_t draws = 100000;
  std::uint64_t seed = 0;
  bool antithetic = true;
};

/// Open support of the block average.
std::pair<double, double> block_support(const BlockLaw& bl, const Anamorphosis& a);

/// Density of the block average by nested adaptive Gauss-Kronrod integration
/// over the whitened Gaussian coordinates. Throws DimensionTooLarge for n > 4.
double block_pdf_exact(const BlockLaw& bl, const Anamorphosis& a, double z);
/// P(Z_V <= z) with the same nested scheme.
double block_cdf_exact(const BlockLaw& bl, const Anamorphosis& a, double z);

/// Importance-sampling density estimate: the first n-1 coordinates are drawn
/// from their Gaussian marginal and the last one is fixed by the average.
McEstimate block_pdf_mc(const BlockLaw& bl, const Anamorphosis& a, double z,
                        const McOptions& options);
/// Same draws shared by every z; entry k equals block_pdf_mc at zs[k].
std::vector<McEstimate> block_pdf_mc_curve(const BlockLaw& bl, const Anamorphosis& a,
                                           std::span<const double> zs, const McOptions& options);
/// P(Z_V <= z): the estimator of block_pdf_mc integrated in closed form from
/// the support minimum to z.
McEstimate block_cdf(const BlockLaw& bl, const Anamorphosis& a, double z, const McOptions& options);
std::vector<McEstimate> block_cdf_curve(const BlockLaw& bl, const Anamorphosis& a,
                                        std::span<const double> zs, const McOptions& options);

double block_mean(const BlockLaw& bl);
double block_variance(const BlockLaw& bl);

}  // namespace mgvol
