#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mgvol/anamorphosis.hpp"
#include "mgvol/conditional.hpp"
#include "mgvol/covariance.hpp"
#include "mgvol/geometry.hpp"
#include "mgvol/kriging.hpp"

namespace mgvol {

inline constexpr std::size_t kDefaultNodeCap = 4096;

struct SimulationOptions {
  std::size_t node_cap = kDefaultNodeCap;
  bool allow_large = false;
};

/// R realizations over a grid; column r holds realization r.
struct RealizationSet {
  Grid grid;
  Eigen::MatrixXd values;
  std::uint64_t seed = 0;
  bool gaussian = true;  // false once back-transformed

  std::size_t node_count() const { return std::size_t(values.rows()); }
  std::size_t realizations() const { return std::size_t(values.cols()); }
};

/// L w with L the Cholesky factor of the grid covariance.
RealizationSet lu_unconditional(const Grid& grid, const CovarianceModel& model, std::size_t R,
                                std::uint64_t seed, const SimulationOptions& options = {});

/// Draws from N(y*_SK, Sigma_SK) over the whole grid. Nodes with zero kriging
/// variance are fixed at y*_SK in every realization.
RealizationSet lu_conditional(const KrigedField& field, std::size_t R, std::uint64_t seed,
                              const SimulationOptions& options = {});

RealizationSet backtransform(const RealizationSet& set, const Anamorphosis& a);

/// Average over the volume's nodes for each realization.
std::vector<double> block_average(const RealizationSet& set, const VolumeSpec& volume);

/// `count` distinct nodes drawn uniformly from realization k. With an
/// anamorphosis, raw values and scores are both filled in.
SampleSet sample_from_realization(const RealizationSet& set, std::size_t k, std::size_t count,
                                  std::uint64_t seed, const Anamorphosis* a = nullptr);

/// Node-wise ensemble mean and unbiased variance.
std::vector<double> ensemble_mean(const RealizationSet& set);
std::vector<double> ensemble_variance(const RealizationSet& set);

/// Flat binary: "MGVOL1", uint64 node count, uint64 R, then R blocks of node
/// values as little-endian doubles.
void write_realizations(const std::string& path, const RealizationSet& set);
RealizationSet read_realizations(const std::string& path, const Grid& grid);

}  // namespace mgvol
