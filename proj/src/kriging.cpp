#include "mgvol/kriging.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgvol/error.hpp"
#include "mgvol/parallel.hpp"

namespace mgvol {

namespace {

constexpr double kClampWarning = 1e-8;

Eigen::MatrixXd factor_samples(const SampleSet& samples, const CovarianceModel& model,
                               double* jitter) {
  const auto c = cov_matrix(model, samples.positions);
  JitteredCholesky chol;
  if (!cholesky_with_jitter(c, model.total_sill(), chol))
    throw SingularSystem("sample covariance not factorizable after jitter escalation");
  if (jitter) *jitter = chol.jitter;
  return chol.lower;
}

Eigen::VectorXd covariances_to(const SampleSet& samples, const CovarianceModel& model,
                               const Point& target) {
  Eigen::VectorXd k(Eigen::Index(samples.size()));
  for (std::size_t a = 0; a < samples.size(); ++a)
    k[Eigen::Index(a)] = model(samples.positions[a], target);
  return k;
}

struct Clamped {
  double value;
  bool warned;
};

Clamped clamp_variance(double v, double sill) {
  const double c = std::clamp(v, 0.0, sill);
  return {c, std::abs(c - v) > kClampWarning};
}

KrigeEstimate krige_subset(const SampleSet& samples, const CovarianceModel& model,
                           const Point& target, std::size_t max_samples) {
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return distance(samples.positions[a], target) < distance(samples.positions[b], target);
  });
  idx.resize(std::min(max_samples, idx.size()));
  SampleSet sub;
  for (auto i : idx) {
    sub.positions.push_back(samples.positions[i]);
    sub.raw.push_back(samples.raw[i]);
    sub.scores.push_back(samples.scores[i]);
  }
  return simple_krige(sub, model, target);
}

}  // namespace

SampleSet SampleSet::from_raw(std::vector<Point> positions, std::vector<double> raw,
                              const Anamorphosis& a) {
  if (positions.size() != raw.size()) throw InputError("positions and values differ in length");
  SampleSet s;
  s.scores.reserve(raw.size());
  for (double z : raw) s.scores.push_back(a.forward(z));
  s.positions = std::move(positions);
  s.raw = std::move(raw);
  return s;
}

SampleSet SampleSet::from_scores(std::vector<Point> positions, std::vector<double> scores,
                                 const Anamorphosis& a) {
  if (positions.size() != scores.size()) throw InputError("positions and scores differ in length");
  SampleSet s;
  s.raw.reserve(scores.size());
  for (double y : scores) s.raw.push_back(a.backward(y));
  s.positions = std::move(positions);
  s.scores = std::move(scores);
  return s;
}

KrigeEstimate simple_krige(const SampleSet& samples, const CovarianceModel& model,
                           const Point& target) {
  const double sill = model.total_sill();
  if (samples.size() == 0) return {0.0, sill};
  const auto lower = factor_samples(samples, model, nullptr);
  const auto tri = lower.triangularView<Eigen::Lower>();
  const Eigen::VectorXd w = tri.solve(covariances_to(samples, model, target));
  const Eigen::VectorXd alpha =
      tri.solve(Eigen::Map<const Eigen::VectorXd>(samples.scores.data(), Eigen::Index(samples.size())));
  return {w.dot(alpha), clamp_variance(sill - w.squaredNorm(), sill).value};
}

KrigedField::KrigedField(const SampleSet& samples, const CovarianceModel& model, const Grid& grid,
                         KrigingOptions options)
    : grid_(grid), model_(model), samples_(samples) {
  const std::size_t n = grid_.node_count();
  if (n == 0) throw InputError("empty grid");
  if (samples_.scores.size() != samples_.size())
    throw InputError("sample scores missing");
  const double sill = model_.total_sill();
  y_star_.assign(n, 0.0);
  sigma2_.assign(n, sill);
  const auto ns = Eigen::Index(samples_.size());
  if (ns > 0) {
    lower_ = factor_samples(samples_, model_, &jitter_);
    const auto tri = lower_.triangularView<Eigen::Lower>();
    half_scores_ = tri.solve(Eigen::Map<const Eigen::VectorXd>(samples_.scores.data(), ns));
    const auto nodes = grid_.positions();
    node_weights_ = tri.solve(cross_cov_matrix(model_, samples_.positions, nodes));
  } else {
    node_weights_.resize(0, Eigen::Index(n));
  }

  std::vector<char> warned(n, 0);
  const bool capped = options.max_samples > 0 && options.max_samples < samples_.size();
  parallel_for(n, [&](std::size_t i) {
    double mean;
    double var;
    if (capped) {
      const auto est = krige_subset(samples_, model_, grid_.position(i), options.max_samples);
      mean = est.y_star;
      var = est.sigma2_sk;
    } else if (ns > 0) {
      const auto w = node_weights_.col(Eigen::Index(i));
      mean = w.dot(half_scores_);
      var = sill - w.squaredNorm();
    } else {
      mean = 0.0;
      var = sill;
    }
    const auto c = clamp_variance(var, sill);
    y_star_[i] = mean;
    sigma2_[i] = c.value;
    warned[i] = c.warned;
  });
  clamp_warnings_ = std::size_t(std::count(warned.begin(), warned.end(), 1));
}

Eigen::VectorXd KrigedField::half_weights(const Point& target) const {
  if (samples_.size() == 0) return Eigen::VectorXd();
  return lower_.triangularView<Eigen::Lower>().solve(covariances_to(samples_, model_, target));
}

KrigeEstimate KrigedField::estimate(const Point& target) const {
  const double sill = model_.total_sill();
  if (samples_.size() == 0) return {0.0, sill};
  const auto w = half_weights(target);
  return {w.dot(half_scores_), clamp_variance(sill - w.squaredNorm(), sill).value};
}

double KrigedField::cross_covariance(const Point& a, const Point& b) const {
  if (distance(a, b) <= model_.duplicate_tolerance()) return estimate(a).sigma2_sk;
  const double prior = model_(a, b);
  if (samples_.size() == 0) return prior;
  return prior - half_weights(a).dot(half_weights(b));
}

double KrigedField::node_cross_covariance(std::size_t i, std::size_t j) const {
  if (i == j) return sigma2_[i];
  const double prior = model_(grid_.position(i), grid_.position(j));
  if (samples_.size() == 0) return prior;
  return prior - node_weights_.col(Eigen::Index(i)).dot(node_weights_.col(Eigen::Index(j)));
}

Eigen::MatrixXd KrigedField::cross_covariance_matrix(std::span<const std::size_t> nodes) const {
  const auto m = Eigen::Index(nodes.size());
  std::vector<Point> pts;
  pts.reserve(nodes.size());
  for (auto i : nodes) {
    if (i >= node_count()) throw InputError("node index out of range");
    pts.push_back(grid_.position(i));
  }
  Eigen::MatrixXd sigma = cross_cov_matrix(model_, pts, pts);
  if (samples_.size() > 0) {
    Eigen::MatrixXd w(node_weights_.rows(), m);
    for (Eigen::Index k = 0; k < m; ++k) w.col(k) = node_weights_.col(Eigen::Index(nodes[std::size_t(k)]));
    sigma.noalias() -= w.transpose() * w;
    sigma.triangularView<Eigen::StrictlyLower>() = sigma.transpose();
  }
  for (Eigen::Index k = 0; k < m; ++k) sigma(k, k) = sigma2_[nodes[std::size_t(k)]];
  return sigma;
}

KrigedField krige_field(const SampleSet& samples, const CovarianceModel& model, const Grid& grid,
                        KrigingOptions options) {
  return KrigedField(samples, model, grid, options);
}

double sk_cross_covariance(const KrigedField& field, const Point& a, const Point& b) {
  return field.cross_covariance(a, b);
}

}  // namespace mgvol
