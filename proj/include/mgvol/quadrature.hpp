#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mgvol {

/// Gauss-Hermite rule for the standard Gaussian measure: for polynomial f of
/// degree < 2n, sum_i w_i f(x_i) equals the integral of f(y) g(y) dy, and the
/// weights sum to one. Nodes with weights below the double range are dropped.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t order = 0;

  std::size_t size() const { return nodes.size(); }

  template <typename F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Cached rule of the given order (thread safe; computed once per order).
const GaussHermiteRule& gauss_hermite(std::size_t order);

/// Adaptive Gauss-Kronrod integration of f over [a, b] (either bound may be
/// infinite). Relative tolerance applies to the whole interval.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-10, double* error_estimate = nullptr,
                          unsigned max_depth = 15);

}  // namespace mgvol
