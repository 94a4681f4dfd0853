#include "mgvol/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "mgvol/error.hpp"

namespace mgvol {

namespace {

// Orthonormal probabilists' Hermite functions psi_k(x) = p_k(x) exp(-x^2/4),
// which stay finite where p_k itself overflows. Returns psi_{n-1}, psi_n and
// the sum of psi_k^2 for k < n.
struct ScaledHermite {
  double prev = 0.0;
  double last = 0.0;
  double sum_sq = 0.0;
};

ScaledHermite scaled_hermite(std::size_t n, double x) {
  ScaledHermite out;
  double pm1 = 0.0;
  double p = std::exp(-0.25 * x * x);
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sum_sq += p * p;
    const double next = (x * p - std::sqrt(double(k)) * pm1) / std::sqrt(double(k + 1));
    pm1 = p;
    p = next;
  }
  out.prev = pm1;
  out.last = p;
  out.sum_sq = sum_sq;
  return out;
}

GaussHermiteRule build_rule(std::size_t n) {
  // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix with zero
  // diagonal and off-diagonal sqrt(k).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(Eigen::Index(n));
  Eigen::VectorXd sub(Eigen::Index(n > 0 ? n - 1 : 0));
  for (Eigen::Index k = 0; k < sub.size(); ++k) sub[k] = std::sqrt(double(k + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw QuadratureFailure("Gauss-Hermite eigenvalue computation failed");

  GaussHermiteRule rule;
  rule.order = n;
  for (std::size_t i = 0; i < n; ++i) {
    double x = solver.eigenvalues()[Eigen::Index(i)];
    // Newton polish: p_n' = sqrt(n) p_{n-1}.
    for (int it = 0; it < 3; ++it) {
      const auto h = scaled_hermite(n, x);
      if (h.prev == 0.0) break;
      x -= h.last / (std::sqrt(double(n)) * h.prev);
    }
    const auto h = scaled_hermite(n, x);
    if (h.sum_sq == 0.0) continue;
    // Christoffel weight 1 / sum_k p_k(x)^2.
    const double w = std::exp(-0.5 * x * x) / h.sum_sq;
    if (!(w > 0.0) || !std::isfinite(w)) continue;
    rule.nodes.push_back(x);
    rule.weights.push_back(w);
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(std::size_t order) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(order));
  return *slot;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* error_estimate, unsigned max_depth) {
  if (a == b) {
    if (error_estimate) *error_estimate = 0.0;
    return 0.0;
  }
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      f, a, b, max_depth, rel_tol, &err);
  if (error_estimate) *error_estimate = err;
  return value;
}

}  // namespace mgvol
