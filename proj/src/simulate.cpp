#include "mgvol/simulate.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

#include "mgvol/error.hpp"
#include "mgvol/parallel.hpp"
#include "mgvol/rng.hpp"

namespace mgvol {

namespace {

constexpr std::uint64_t kUnconditionalTag = 0x554e43ULL << 32;
constexpr std::uint64_t kConditionalTag = 0x434f4eULL << 32;
constexpr std::uint64_t kSamplingStream = 0x53414dULL << 32;
constexpr char kMagic[6] = {'M', 'G', 'V', 'O', 'L', '1'};

void check_cap(std::size_t nodes, const SimulationOptions& options) {
  if (nodes > options.node_cap && !options.allow_large)
    throw GridTooLarge(std::to_string(nodes) + " nodes exceed the cap of " +
                       std::to_string(options.node_cap) + " (use --allow-large)");
}

// Column r filled with normals from stream tag + r, indexed by row.
Eigen::MatrixXd white_noise(std::size_t rows, std::size_t R, std::uint64_t seed,
                            std::uint64_t tag) {
  Eigen::MatrixXd w(rows, R);
  parallel_for(R, [&](std::size_t r) {
    const CounterRng rng(seed, tag + r);
    for (std::size_t i = 0; i < rows; ++i) w(i, r) = rng.normal(i);
  });
  return w;
}

Eigen::MatrixXd factor(const Eigen::MatrixXd& matrix, double scale) {
  JitteredCholesky chol;
  if (!cholesky_with_jitter(matrix, scale, chol))
    throw NotPSD("covariance matrix is not positive semi-definite even with jitter");
  return std::move(chol.lower);
}

std::uint64_t little_endian(std::uint64_t value) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(value);
  return value;
}

void put(std::ofstream& out, std::uint64_t value) {
  value = little_endian(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

std::uint64_t get(std::ifstream& in) {
  std::uint64_t value = 0;
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  return little_endian(value);
}

}  // namespace

RealizationSet lu_unconditional(const Grid& grid, const CovarianceModel& model, std::size_t R,
                                std::uint64_t seed, const SimulationOptions& options) {
  const std::size_t n = grid.node_count();
  check_cap(n, options);
  if (R == 0) throw InputError("realization count must be positive");
  const auto positions = grid.positions();
  const Eigen::MatrixXd lower = factor(cov_matrix(model, positions), model.total_sill());
  RealizationSet set;
  set.grid = grid;
  set.seed = seed;
  set.values.noalias() = lower.triangularView<Eigen::Lower>() *
                         white_noise(n, R, seed, kUnconditionalTag);
  return set;
}

RealizationSet lu_conditional(const KrigedField& field, std::size_t R, std::uint64_t seed,
                              const SimulationOptions& options) {
  const std::size_t n = field.node_count();
  check_cap(n, options);
  if (R == 0) throw InputError("realization count must be positive");

  std::vector<std::size_t> free_nodes;
  for (std::size_t i = 0; i < n; ++i)
    if (field.sigma2(i) >= kDegenerateVariance) free_nodes.push_back(i);

  RealizationSet set;
  set.grid = field.grid();
  set.seed = seed;
  set.values.resize(n, R);
  for (std::size_t i = 0; i < n; ++i) set.values.row(i).setConstant(field.y_star(i));
  if (free_nodes.empty()) return set;

  const Eigen::MatrixXd lower =
      factor(field.cross_covariance_matrix(free_nodes), field.model().total_sill());
  Eigen::MatrixXd noise = white_noise(free_nodes.size(), R, seed, kConditionalTag);
  Eigen::MatrixXd draws(free_nodes.size(), R);
  draws.noalias() = lower.triangularView<Eigen::Lower>() * noise;
  for (std::size_t k = 0; k < free_nodes.size(); ++k)
    set.values.row(free_nodes[k]) += draws.row(k);
  return set;
}

RealizationSet backtransform(const RealizationSet& set, const Anamorphosis& a) {
  if (!set.gaussian) throw InputError("realizations are already back-transformed");
  RealizationSet out = set;
  out.gaussian = false;
  double* data = out.values.data();
  const std::size_t size = std::size_t(out.values.size());
  parallel_for(size, [&](std::size_t i) { data[i] = a.backward(data[i]); });
  return out;
}

std::vector<double> block_average(const RealizationSet& set, const VolumeSpec& volume) {
  volume.validate(set.node_count());
  std::vector<double> out(set.realizations());
  for (std::size_t r = 0; r < out.size(); ++r) {
    double sum = 0.0;
    for (auto node : volume.nodes) sum += set.values(node, r);
    out[r] = sum / double(volume.size());
  }
  return out;
}

SampleSet sample_from_realization(const RealizationSet& set, std::size_t k, std::size_t count,
                                  std::uint64_t seed, const Anamorphosis* a) {
  const std::size_t n = set.node_count();
  if (k >= set.realizations()) throw InputError("realization index out of range");
  if (count > n)
    throw CountExceedsNodes("requested " + std::to_string(count) + " samples from " +
                            std::to_string(n) + " nodes");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const CounterRng rng(seed, kSamplingStream);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + std::size_t(rng.uniform(i) * double(n - i));
    std::swap(order[i], order[std::min(j, n - 1)]);
  }

  SampleSet samples;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t node = order[i];
    const double v = set.values(node, k);
    samples.positions.push_back(set.grid.position(node));
    if (!a) {
      samples.raw.push_back(v);
      samples.scores.push_back(v);
    } else if (set.gaussian) {
      samples.raw.push_back(a->backward(v));
      samples.scores.push_back(v);
    } else {
      samples.raw.push_back(v);
      samples.scores.push_back(a->forward(v));
    }
  }
  return samples;
}

std::vector<double> ensemble_mean(const RealizationSet& set) {
  std::vector<double> out(set.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = set.values.row(i).mean();
  return out;
}

std::vector<double> ensemble_variance(const RealizationSet& set) {
  const double R = double(set.realizations());
  if (R < 2) throw InputError("variance needs at least two realizations");
  std::vector<double> out(set.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto row = set.values.row(i);
    out[i] = (row.array() - row.mean()).square().sum() / (R - 1.0);
  }
  return out;
}

void write_realizations(const std::string& path, const RealizationSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, set.node_count());
  put(out, set.realizations());
  const double* data = set.values.data();
  for (Eigen::Index i = 0; i < set.values.size(); ++i)
    put(out, std::bit_cast<std::uint64_t>(data[i]));
  if (!out) throw InputError("failed writing " + path);
}

RealizationSet read_realizations(const std::string& path, const Grid& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw InputError(path + " is not a realization file");
  const auto nodes = get(in);
  const auto R = get(in);
  if (!in) throw InputError(path + ": truncated header");
  if (nodes != grid.node_count())
    throw InputError(path + ": node count does not match the grid");
  RealizationSet set;
  set.grid = grid;
  set.values.resize(Eigen::Index(nodes), Eigen::Index(R));
  double* data = set.values.data();
  for (Eigen::Index i = 0; i < set.values.size(); ++i)
    data[i] = std::bit_cast<double>(get(in));
  if (!in) throw InputError(path + ": truncated data");
  return set;
}

}  // namespace mgvol
