#include "mgvol/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "mgvol/error.hpp"
#include "mgvol/normal.hpp"
#include "mgvol/parallel.hpp"
#include "mgvol/quadrature.hpp"

namespace mgvol {

namespace {

constexpr std::size_t kFirstOrder = 128;
constexpr std::size_t kMaxOrder = 1024;
constexpr double kConvergence = 1e-8;
constexpr std::size_t kPairOrder = 128;

const Anamorphosis& ana(const PointLaw& law) {
  if (!law.anamorphosis) throw InputError("point law without anamorphosis");
  return *law.anamorphosis;
}

// Integrates f(phi(y* + sigma t)) against g with doubling orders until two
// successive results agree; `magnitude` gives the scale for the test.
template <typename F, typename M>
double converged(const PointLaw& law, F&& f, M&& magnitude, const char* what) {
  const auto& a = ana(law);
  const double s = law.sigma();
  double previous = 0.0;
  for (std::size_t order = kFirstOrder; order <= kMaxOrder; order *= 2) {
    const auto& rule = gauss_hermite(order);
    double value = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double z = a.backward(law.y_star + s * rule.nodes[i]);
      value += rule.weights[i] * f(z);
      scale += rule.weights[i] * magnitude(z);
    }
    if (!std::isfinite(value)) break;
    if (order > kFirstOrder && std::abs(value - previous) <= kConvergence * std::max(scale, 1e-300))
      return value;
    previous = value;
  }
  throw QuadratureFailure(std::string(what) + " did not converge by " +
                          std::to_string(kMaxOrder) + " nodes");
}

}  // namespace

PointLaw::PointLaw(const Anamorphosis& a, double y, double s2)
    : anamorphosis(&a), y_star(y), sigma2_sk(s2) {
  if (!std::isfinite(y)) throw InputError("non-finite conditional mean");
  if (!(s2 >= 0.0 && s2 <= 1.0 + 1e-12))
    throw InputError("conditional variance " + std::to_string(s2) + " outside [0, 1]");
  sigma2_sk = std::min(s2, 1.0);
}

double PointLaw::sigma() const { return degenerate() ? 0.0 : std::sqrt(sigma2_sk); }

VolumeSpec::VolumeSpec(std::vector<std::size_t> n) : nodes(std::move(n)) {}

void VolumeSpec::validate(std::size_t node_count) const {
  if (nodes.empty()) throw InputError("empty volume");
  std::set<std::size_t> seen;
  for (auto i : nodes) {
    if (i >= node_count) throw InputError("volume node " + std::to_string(i) + " out of range");
    if (!seen.insert(i).second) throw InputError("volume node " + std::to_string(i) + " repeated");
  }
}

std::vector<VolumeSpec> VolumeSpec::tile(const Grid& grid, std::size_t bx, std::size_t by,
                                         std::size_t bz) {
  if (bx == 0 || by == 0 || bz == 0) throw InputError("block tile sizes must be positive");
  std::vector<VolumeSpec> out;
  for (std::size_t kz = 0; kz + bz <= grid.nz; kz += bz)
    for (std::size_t ky = 0; ky + by <= grid.ny; ky += by)
      for (std::size_t kx = 0; kx + bx <= grid.nx; kx += bx) {
        VolumeSpec v;
        for (std::size_t iz = kz; iz < kz + bz; ++iz)
          for (std::size_t iy = ky; iy < ky + by; ++iy)
            for (std::size_t ix = kx; ix < kx + bx; ++ix) v.nodes.push_back(grid.index(ix, iy, iz));
        out.push_back(std::move(v));
      }
  return out;
}

double point_pdf(const PointLaw& law, double z) {
  if (law.degenerate()) throw DegenerateLaw("zero conditional variance: point mass at phi(y*)");
  const auto& a = ana(law);
  if (!(z > a.lower_bound() && z < a.upper_bound())) return 0.0;
  const double y = a.forward(z);
  const double s = law.sigma();
  const double log_density =
      normal::log_pdf((y - law.y_star) / s) - std::log(s) - std::log(a.derivative(y));
  return std::exp(log_density);
}

double point_cdf(const PointLaw& law, double z) {
  if (law.degenerate()) throw DegenerateLaw("zero conditional variance: step cdf");
  const auto& a = ana(law);
  if (z <= a.lower_bound()) return 0.0;
  if (z >= a.upper_bound()) return 1.0;
  return normal::cdf((a.forward(z) - law.y_star) / law.sigma());
}

double point_quantile(const PointLaw& law, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("probability outside (0, 1)");
  return ana(law).backward(law.y_star + law.sigma() * normal::quantile(p));
}

double conditional_moment(const PointLaw& law, int order) {
  if (order < 1) throw InputError("moment order must be >= 1");
  if (law.degenerate()) return std::pow(ana(law).backward(law.y_star), order);
  return converged(
      law, [order](double z) { return std::pow(z, order); },
      [order](double z) { return std::pow(std::abs(z), order); }, "conditional moment");
}

double conditional_mean(const PointLaw& law) { return conditional_moment(law, 1); }

double conditional_variance(const PointLaw& law) {
  if (law.degenerate()) return 0.0;
  const double mean = conditional_mean(law);
  const double var = converged(
      law, [mean](double z) { return (z - mean) * (z - mean); },
      [mean](double z) { return (z - mean) * (z - mean); }, "conditional variance");
  return std::max(var, 0.0);
}

double pair_covariance(const PointLaw& law_i, const PointLaw& law_j, double rho_sk) {
  const double vi = law_i.degenerate() ? 0.0 : law_i.sigma2_sk;
  const double vj = law_j.degenerate() ? 0.0 : law_j.sigma2_sk;
  if (!std::isfinite(rho_sk) || rho_sk * rho_sk > vi * vj * (1.0 + 1e-9) + 1e-14)
    throw NotPSD("pair error covariance " + std::to_string(rho_sk) + " exceeds sqrt(" +
                 std::to_string(vi) + " * " + std::to_string(vj) + ")");
  if (vi == 0.0 || vj == 0.0) return 0.0;
  const auto& ai = ana(law_i);
  const auto& aj = ana(law_j);

  const double l11 = std::sqrt(vi);
  const double l21 = rho_sk / l11;
  const double l22 = std::sqrt(std::max(0.0, vj - l21 * l21));
  const auto& rule = gauss_hermite(kPairOrder);
  const std::size_t n = rule.size();

  std::vector<double> zi(n), inner(n);
  double mean_i = 0.0, mean_j = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    zi[a] = ai.backward(law_i.y_star + l11 * rule.nodes[a]);
    const double base = law_j.y_star + l21 * rule.nodes[a];
    double s = 0.0;
    for (std::size_t b = 0; b < n; ++b) s += rule.weights[b] * aj.backward(base + l22 * rule.nodes[b]);
    inner[a] = s;
    mean_i += rule.weights[a] * zi[a];
    mean_j += rule.weights[a] * s;
  }
  double cov = 0.0;
  for (std::size_t a = 0; a < n; ++a) cov += rule.weights[a] * (zi[a] - mean_i) * (inner[a] - mean_j);
  if (!std::isfinite(cov)) throw QuadratureFailure("pair covariance is not finite");
  return cov;
}

bool PairCovarianceCache::find(std::size_t i, std::size_t j, double& value) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = values_.find({std::min(i, j), std::max(i, j)});
  if (it == values_.end()) return false;
  value = it->second;
  return true;
}

void PairCovarianceCache::store(std::size_t i, std::size_t j, double value) {
  std::lock_guard<std::mutex> lock(mutex_);
  values_[{std::min(i, j), std::max(i, j)}] = value;
}

std::size_t PairCovarianceCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return values_.size();
}

PointLaw node_law(const KrigedField& field, std::size_t node, const Anamorphosis& a) {
  return PointLaw(a, field.y_star(node), field.sigma2(node));
}

double volume_variance(const KrigedField& field, const VolumeSpec& volume, const Anamorphosis& a,
                       PairCovarianceCache* cache) {
  volume.validate(field.node_count());
  std::vector<std::size_t> nodes = volume.nodes;
  std::sort(nodes.begin(), nodes.end());
  const std::size_t n = nodes.size();
  std::vector<PointLaw> laws;
  laws.reserve(n);
  for (auto node : nodes) laws.push_back(node_law(field, node, a));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);

  std::vector<double> values(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    double v;
    if (cache && cache->find(nodes[i], nodes[j], v)) {
      values[k] = v;
      return;
    }
    if (i == j) {
      v = conditional_variance(laws[i]);
    } else {
      v = pair_covariance(laws[i], laws[j], field.node_cross_covariance(nodes[i], nodes[j]));
    }
    values[k] = v;
    if (cache) cache->store(nodes[i], nodes[j], v);
  });

  double sum = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k)
    sum += (pairs[k].first == pairs[k].second ? 1.0 : 2.0) * values[k];
  return std::max(sum / double(n * n), 0.0);
}

std::vector<double> conditional_mean_map(const KrigedField& field, const Anamorphosis& a) {
  std::vector<double> out(field.node_count());
  parallel_for(out.size(), [&](std::size_t i) { out[i] = conditional_mean(node_law(field, i, a)); });
  return out;
}

std::vector<double> conditional_variance_map(const KrigedField& field, const Anamorphosis& a) {
  std::vector<double> out(field.node_count());
  parallel_for(out.size(),
               [&](std::size_t i) { out[i] = conditional_variance(node_law(field, i, a)); });
  return out;
}

}  // namespace mgvol
