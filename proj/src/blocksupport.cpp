#include "mgvol/blocksupport.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "mgvol/covariance.hpp"
#include "mgvol/error.hpp"
#include "mgvol/normal.hpp"
#include "mgvol/parallel.hpp"
#include "mgvol/quadrature.hpp"
#include "mgvol/rng.hpp"

namespace mgvol {

namespace {

constexpr double kTailBound = 8.0;
constexpr double kLevelTolerance = 1e-6;
constexpr std::size_t kChunks = 64;
constexpr std::uint64_t kBlockStream = 0x426c6f636b4d43ULL;

// y = mu + L t over the non-degenerate nodes; the last coordinate is the one
// solved from the average.
struct Whitened {
  double n = 1.0;
  double constant = 0.0;
  std::size_t m = 0;
  Eigen::VectorXd mu;
  Eigen::MatrixXd lower;
};

Whitened whiten(const BlockLaw& bl, const Anamorphosis& a) {
  const std::size_t n = bl.size();
  if (n == 0) throw InputError("block law without nodes");
  if (std::size_t(bl.sigma.rows()) != n || std::size_t(bl.sigma.cols()) != n)
    throw InputError("block covariance has the wrong shape");

  Whitened w;
  w.n = double(n);
  std::vector<std::size_t> random;
  for (std::size_t i = 0; i < n; ++i) {
    if (bl.laws[i].degenerate())
      w.constant += a.backward(bl.laws[i].y_star);
    else
      random.push_back(i);
  }
  w.m = random.size();
  if (w.m == 0) return w;

  Eigen::MatrixXd sub(w.m, w.m);
  for (std::size_t i = 0; i < w.m; ++i)
    for (std::size_t j = 0; j < w.m; ++j) sub(i, j) = bl.sigma(random[i], random[j]);

  if (w.m > 1) {
    // Solve for the node with the largest conditional variance.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    std::size_t best = w.m - 1;
    if (lu.isInvertible()) {
      const Eigen::MatrixXd inv = lu.inverse();
      double best_var = -1.0;
      for (std::size_t i = 0; i < w.m; ++i) {
        const double v = inv(i, i) > 0.0 ? 1.0 / inv(i, i) : 0.0;
        if (v > best_var) {
          best_var = v;
          best = i;
        }
      }
    }
    std::swap(random[best], random.back());
    for (std::size_t i = 0; i < w.m; ++i)
      for (std::size_t j = 0; j < w.m; ++j) sub(i, j) = bl.sigma(random[i], random[j]);
  }

  JitteredCholesky chol;
  if (!cholesky_with_jitter(sub, sub.diagonal().maxCoeff(), chol))
    throw NotPSD("block error covariance is not positive semi-definite");
  w.lower = chol.lower;
  if (!(w.lower(w.m - 1, w.m - 1) > 0.0))
    throw DegenerateLaw("block average has no free direction");
  w.mu.resize(w.m);
  for (std::size_t i = 0; i < w.m; ++i) w.mu[i] = bl.laws[random[i]].y_star;
  return w;
}

// Contribution of the solved coordinate once the others are fixed:
// density of the last score at the residual (pdf) or its cdf.
struct LastCoordinate {
  const Anamorphosis& a;
  double lo, hi;
  double scale;  // L_mm

  double density(double residual, double mean) const {
    if (!(residual > lo && residual < hi)) return 0.0;
    const double y = a.forward(residual);
    const double d = a.derivative(y);
    if (!(d > 0.0) || !std::isfinite(d)) return 0.0;
    const double v = normal::pdf((y - mean) / scale) / (scale * d);
    return std::isfinite(v) ? v : 0.0;
  }
  double cdf(double residual, double mean) const {
    if (!(residual > lo)) return 0.0;
    if (!(residual < hi)) return 1.0;
    return normal::cdf((a.forward(residual) - mean) / scale);
  }
};

class Nested {
 public:
  Nested(const Whitened& w, const Anamorphosis& a, double s, bool cumulative)
      : w_(w), a_(a), s_(s), cumulative_(cumulative),
        last_{a, a.lower_bound(), a.upper_bound(), w.lower(w.m - 1, w.m - 1)} {}

  double run() { return level(0, 0.0); }

 private:
  // Integrates over t_k given t_0..t_{k-1} and the raw sum of nodes < k.
  double level(std::size_t k, double partial) {
    const std::size_t last = w_.m - 1;
    if (k == last) {
      double mean = w_.mu[last];
      for (std::size_t j = 0; j < last; ++j) mean += w_.lower(last, j) * t_[j];
      const double r = s_ - partial;
      return cumulative_ ? last_.cdf(r, mean) : last_.density(r, mean);
    }
    double shift = w_.mu[k];
    for (std::size_t j = 0; j < k; ++j) shift += w_.lower(k, j) * t_[j];
    const double lkk = w_.lower(k, k);
    double t_lo = -kTailBound, t_hi = kTailBound;

    // Remaining nodes after k must still fit inside the support.
    const double rem = s_ - partial;
    const double after = double(last - k);
    const double lo = a_.lower_bound(), hi = a_.upper_bound();
    if (std::isfinite(lo)) {
      const double cap = rem - after * lo;
      if (cap <= lo) return 0.0;
      if (cap < hi) t_hi = std::min(t_hi, (a_.forward(cap) - shift) / lkk);
    }
    if (!cumulative_ && std::isfinite(hi)) {
      const double floor = rem - after * hi;
      if (floor >= hi) return 0.0;
      if (floor > lo) t_lo = std::max(t_lo, (a_.forward(floor) - shift) / lkk);
    }
    if (!(t_hi > t_lo)) return 0.0;

    auto f = [&, k, shift, lkk, partial](double t) {
      t_[k] = t;
      const double y = shift + lkk * t;
      return normal::pdf(t) * level(k + 1, partial + a_.backward(y));
    };
    return integrate_adaptive(f, t_lo, t_hi, kLevelTolerance);
  }

  const Whitened& w_;
  const Anamorphosis& a_;
  double s_;
  bool cumulative_;
  LastCoordinate last_;
  std::array<double, kMaxExactNodes> t_{};
};

void check_exact_size(const BlockLaw& bl) {
  if (bl.size() > kMaxExactNodes)
    throw DimensionTooLarge("exact block integration supports at most " +
                            std::to_string(kMaxExactNodes) + " nodes, got " +
                            std::to_string(bl.size()));
}

// Running mean / M2 (Chan et al. merge) so chunk results combine exactly in
// a fixed order.
struct Moments {
  double count = 0.0, mean = 0.0, m2 = 0.0;
  void add(double x) {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / total;
    m2 += o.m2 + d * d * count * o.count / total;
    count = total;
  }
  McEstimate estimate() const {
    const double var = count > 1.0 ? m2 / (count - 1.0) : 0.0;
    return {mean, std::sqrt(std::max(var, 0.0) / std::max(count, 1.0))};
  }
};

std::vector<McEstimate> mc_curve(const BlockLaw& bl, const Anamorphosis& a,
                                 std::span<const double> zs, const McOptions& options,
                                 bool cumulative) {
  if (options.draws < 1000) throw InputError("at least 1000 Monte-Carlo draws are required");
  const Whitened w = whiten(bl, a);
  std::vector<McEstimate> out(zs.size());
  if (w.m == 0) {
    if (!cumulative) throw DegenerateLaw("all block nodes are fixed: point mass");
    for (std::size_t k = 0; k < zs.size(); ++k) out[k] = {zs[k] * w.n >= w.constant ? 1.0 : 0.0, 0.0};
    return out;
  }
  const std::size_t free_dims = w.m - 1;
  const std::size_t last = w.m - 1;
  const LastCoordinate lc{a, a.lower_bound(), a.upper_bound(), w.lower(last, last)};
  auto contribution = [&](double z, double partial, double mean) {
    const double r = z * w.n - w.constant - partial;
    return cumulative ? lc.cdf(r, mean) : w.n * lc.density(r, mean);
  };

  if (free_dims == 0) {
    for (std::size_t k = 0; k < zs.size(); ++k) out[k] = {contribution(zs[k], 0.0, w.mu[last]), 0.0};
    return out;
  }

  const bool anti = options.antithetic;
  const std::size_t units = anti ? (options.draws + 1) / 2 : options.draws;
  const CounterRng rng(options.seed, kBlockStream);
  std::vector<std::vector<Moments>> chunk_moments(kChunks, std::vector<Moments>(zs.size()));

  parallel_for(kChunks, [&](std::size_t c) {
    const std::size_t begin = units * c / kChunks, end = units * (c + 1) / kChunks;
    auto& acc = chunk_moments[c];
    std::vector<double> t(free_dims);
    std::array<double, 2> partial{}, mean{};
    for (std::size_t u = begin; u < end; ++u) {
      for (std::size_t d = 0; d < free_dims; ++d) t[d] = rng.normal(u * free_dims + d);
      const int members = anti ? 2 : 1;
      for (int s = 0; s < members; ++s) {
        const double sign = s == 0 ? 1.0 : -1.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < free_dims; ++i) {
          double y = w.mu[i];
          for (std::size_t j = 0; j <= i; ++j) y += w.lower(i, j) * sign * t[j];
          sum += a.backward(y);
        }
        double mm = w.mu[last];
        for (std::size_t j = 0; j < free_dims; ++j) mm += w.lower(last, j) * sign * t[j];
        partial[s] = sum;
        mean[s] = mm;
      }
      for (std::size_t k = 0; k < zs.size(); ++k) {
        double v = contribution(zs[k], partial[0], mean[0]);
        if (anti) v = 0.5 * (v + contribution(zs[k], partial[1], mean[1]));
        acc[k].add(v);
      }
    }
  });

  for (std::size_t k = 0; k < zs.size(); ++k) {
    Moments total;
    for (std::size_t c = 0; c < kChunks; ++c) total.merge(chunk_moments[c][k]);
    out[k] = total.estimate();
  }
  return out;
}

}  // namespace

BlockLaw make_block_law(const KrigedField& field, const VolumeSpec& volume, const Anamorphosis& a) {
  volume.validate(field.node_count());
  BlockLaw bl;
  for (auto node : volume.nodes) bl.laws.push_back(node_law(field, node, a));
  bl.sigma = field.cross_covariance_matrix(volume.nodes);
  whiten(bl, a);
  return bl;
}

BlockLaw make_block_law(const Anamorphosis& a, std::span<const double> y_star,
                        const Eigen::MatrixXd& sigma) {
  const std::size_t n = y_star.size();
  if (std::size_t(sigma.rows()) != n || std::size_t(sigma.cols()) != n)
    throw InputError("block covariance has the wrong shape");
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw NotPSD("block covariance is not symmetric");
  BlockLaw bl;
  for (std::size_t i = 0; i < n; ++i) bl.laws.emplace_back(a, y_star[i], sigma(i, i));
  bl.sigma = sigma;
  whiten(bl, a);
  return bl;
}

std::pair<double, double> block_support(const BlockLaw& bl, const Anamorphosis& a) {
  double constant = 0.0;
  double m = 0.0;
  for (const auto& law : bl.laws) {
    if (law.degenerate())
      constant += a.backward(law.y_star);
    else
      m += 1.0;
  }
  const double n = double(bl.size());
  auto edge = [&](double b) { return m == 0.0 ? constant / n : (constant + m * b) / n; };
  return {edge(a.lower_bound()), edge(a.upper_bound())};
}

double block_pdf_exact(const BlockLaw& bl, const Anamorphosis& a, double z) {
  check_exact_size(bl);
  const Whitened w = whiten(bl, a);
  if (w.m == 0) throw DegenerateLaw("all block nodes are fixed: point mass");
  Nested nested(w, a, w.n * z - w.constant, false);
  return std::max(0.0, w.n * nested.run());
}

double block_cdf_exact(const BlockLaw& bl, const Anamorphosis& a, double z) {
  check_exact_size(bl);
  const Whitened w = whiten(bl, a);
  if (w.m == 0) return w.n * z >= w.constant ? 1.0 : 0.0;
  Nested nested(w, a, w.n * z - w.constant, true);
  return std::clamp(nested.run(), 0.0, 1.0);
}

McEstimate block_pdf_mc(const BlockLaw& bl, const Anamorphosis& a, double z,
                        const McOptions& options) {
  return mc_curve(bl, a, std::span<const double>(&z, 1), options, false).front();
}

std::vector<McEstimate> block_pdf_mc_curve(const BlockLaw& bl, const Anamorphosis& a,
                                           std::span<const double> zs, const McOptions& options) {
  return mc_curve(bl, a, zs, options, false);
}

McEstimate block_cdf(const BlockLaw& bl, const Anamorphosis& a, double z, const McOptions& options) {
  return mc_curve(bl, a, std::span<const double>(&z, 1), options, true).front();
}

std::vector<McEstimate> block_cdf_curve(const BlockLaw& bl, const Anamorphosis& a,
                                        std::span<const double> zs, const McOptions& options) {
  return mc_curve(bl, a, zs, options, true);
}

double block_mean(const BlockLaw& bl) {
  double sum = 0.0;
  for (const auto& law : bl.laws) sum += conditional_mean(law);
  return sum / double(bl.size());
}

double block_variance(const BlockLaw& bl) {
  const std::size_t n = bl.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += conditional_variance(bl.laws[i]);
    for (std::size_t j = i + 1; j < n; ++j)
      sum += 2.0 * pair_covariance(bl.laws[i], bl.laws[j], bl.sigma(i, j));
  }
  return std::max(sum, 0.0) / double(n * n);
}

}  // namespace mgvol
