#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mgvol/blocksupport.hpp"
#include "mgvol/error.hpp"
#include "mgvol/quadrature.hpp"
#include "mgvol/stats.hpp"

using namespace mgvol;

namespace {

const Anamorphosis logn = Anamorphosis::lognormal(0.0, 1.0);
const Anamorphosis expo = Anamorphosis::exponential(1.0 / 0.8);

BlockLaw pair_law(const Anamorphosis& a, double rho) {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, rho, rho, 1.0;
  const std::vector<double> mu{0.0, 0.0};
  return make_block_law(a, mu, s);
}

// 10^7 draws of the average of two standard lognormals with score correlation rho.
std::vector<double> sampled_pair_averages(double rho, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  const double l22 = std::sqrt(1.0 - rho * rho);
  std::vector<double> out(10000000);
  for (auto& v : out) {
    const double t1 = g(gen), t2 = g(gen);
    v = 0.5 * (std::exp(t1) + std::exp(rho * t1 + l22 * t2));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Largest gap between the empirical cdf and the exact cdf over a z grid.
double ks_on_grid(const std::vector<double>& sorted, const BlockLaw& bl, const Anamorphosis& a) {
  double d = 0.0;
  const double n = double(sorted.size());
  for (double p = 0.005; p < 1.0; p += 0.01) {
    const double z = sorted[std::size_t(p * n)];
    const double ecdf = double(std::upper_bound(sorted.begin(), sorted.end(), z) - sorted.begin()) / n;
    d = std::max(d, std::abs(ecdf - block_cdf_exact(bl, a, z)));
  }
  return d;
}

BlockLaw three_node_law() {
  Eigen::MatrixXd s(3, 3);
  s << 0.6, 0.3, 0.1, 0.3, 0.5, 0.2, 0.1, 0.2, 0.7;
  const std::vector<double> mu{0.3, -0.2, 0.1};
  return make_block_law(expo, mu, s);
}

}  // namespace

TEST_CASE("one node reduces to the point law") {
  Eigen::MatrixXd s(1, 1);
  s << 0.4;
  const std::vector<double> mu{0.3};
  const auto bl = make_block_law(logn, mu, s);
  const PointLaw law(logn, 0.3, 0.4);
  for (double z : {0.3, 1.0, 2.2, 6.0}) {
    CHECK(block_pdf_exact(bl, logn, z) == doctest::Approx(point_pdf(law, z)).epsilon(1e-14));
    CHECK(block_cdf_exact(bl, logn, z) == doctest::Approx(point_cdf(law, z)).epsilon(1e-14));
  }
}

TEST_CASE("independent lognormal pair against a sampling oracle") {
  const auto bl = pair_law(logn, 0.0);
  const auto sorted = sampled_pair_averages(0.0, 1);
  CHECK(ks_on_grid(sorted, bl, logn) <= 0.003);

  // P(average <= e^{1/2}) against the same draws.
  const double z = std::exp(0.5);
  const double n = double(sorted.size());
  const double p = double(std::upper_bound(sorted.begin(), sorted.end(), z) - sorted.begin()) / n;
  const double oracle_se = std::sqrt(p * (1 - p) / n);
  const auto c = block_cdf(bl, logn, z, {1000000, 5});
  CHECK(std::abs(c.value - p) <= 3.0 * std::hypot(c.se, oracle_se));
  CHECK(block_cdf_exact(bl, logn, z) == doctest::Approx(p).epsilon(3.0 * oracle_se / p));
}

TEST_CASE("correlated lognormal pair against a sampling oracle") {
  const auto bl = pair_law(logn, 0.6);
  CHECK(ks_on_grid(sampled_pair_averages(0.6, 2), bl, logn) <= 0.003);
}

TEST_CASE("Monte-Carlo density agrees with the exact density") {
  const auto bl = pair_law(logn, 0.0);
  const std::vector<double> zs{0.4, 0.8, 1.2, 1.6, 2.5, 4.0};
  const auto mc = block_pdf_mc_curve(bl, logn, zs, {1000000, 9});
  for (std::size_t k = 0; k < zs.size(); ++k) {
    CAPTURE(zs[k]);
    CHECK(std::abs(mc[k].value - block_pdf_exact(bl, logn, zs[k])) <= 3.0 * mc[k].se);
    CHECK(mc[k].se > 0.0);
  }
  const auto three = three_node_law();
  for (double z : {0.3, 0.7, 1.4}) {
    const auto e = block_pdf_mc(three, expo, z, {200000, 4});
    CHECK(std::abs(e.value - block_pdf_exact(three, expo, z)) <= 4.0 * e.se);
  }
}

TEST_CASE("residual outside the support gives zero density") {
  const auto bl = pair_law(logn, 0.3);
  const auto e = block_pdf_mc(bl, logn, -0.5, {2000, 1});
  CHECK(e.value == 0.0);
  CHECK(e.se == 0.0);
  CHECK(block_pdf_exact(bl, logn, -0.5) == 0.0);
  CHECK(block_cdf_exact(bl, logn, -0.5) == 0.0);
  CHECK(block_cdf(bl, logn, 1e6, {2000, 1}).value == doctest::Approx(1.0));
  CHECK(block_cdf_exact(bl, logn, 1e6) == doctest::Approx(1.0));
}

TEST_CASE("normalization, mean and variance consistency") {
  const auto bl = three_node_law();
  const auto [lo, hi] = block_support(bl, expo);
  CHECK(lo == 0.0);
  CHECK(std::isinf(hi));
  const double upper = 12.0;
  const double total = integrate_adaptive([&](double z) { return block_pdf_exact(bl, expo, z); },
                                          0.0, upper, 1e-6);
  CHECK(total == doctest::Approx(1.0).epsilon(2e-3));
  const double m1 = integrate_adaptive(
      [&](double z) { return z * block_pdf_exact(bl, expo, z); }, 0.0, upper, 1e-6);
  const double m2 = integrate_adaptive(
      [&](double z) { return z * z * block_pdf_exact(bl, expo, z); }, 0.0, upper, 1e-6);
  CHECK(m1 == doctest::Approx(block_mean(bl)).epsilon(2e-3));
  CHECK(m2 - m1 * m1 == doctest::Approx(block_variance(bl)).epsilon(1e-2));
}

TEST_CASE("cdf is monotone and matches the exact cdf") {
  const auto bl = three_node_law();
  std::vector<double> zs;
  for (double z = 0.05; z < 4.0; z += 0.15) zs.push_back(z);
  const auto c = block_cdf_curve(bl, expo, zs, {100000, 3});
  for (std::size_t k = 1; k < zs.size(); ++k) CHECK(c[k].value >= c[k - 1].value);
  for (std::size_t k = 0; k < zs.size(); k += 6)
    CHECK(std::abs(c[k].value - block_cdf_exact(bl, expo, zs[k])) <= 4.0 * c[k].se + 1e-12);
}

TEST_CASE("determinism") {
  const auto bl = three_node_law();
  const std::vector<double> zs{0.5, 1.0};
  const auto a = block_pdf_mc_curve(bl, expo, zs, {5000, 77});
  const auto b = block_pdf_mc_curve(bl, expo, zs, {5000, 77});
  const auto single = block_pdf_mc(bl, expo, 1.0, {5000, 77});
  CHECK(a[0].value == b[0].value);
  CHECK(a[1].se == b[1].se);
  CHECK(single.value == a[1].value);
  CHECK(block_pdf_mc(bl, expo, 1.0, {5000, 78}).value != single.value);
}

TEST_CASE("block laws from a kriged field") {
  Grid g;
  g.nx = 6;
  g.ny = 6;
  g.spacing = {20.0, 20.0, 1.0};
  const auto model = CovarianceModel::parse("0.1 nugget + 0.9 sph(100)");

  const KrigedField prior(SampleSet{}, model, g);
  const VolumeSpec v({0, 1, 7});
  const auto bl0 = make_block_law(prior, v, expo);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(bl0.sigma(i, j) == doctest::Approx(cov(model, g.position(v.nodes[std::size_t(i)]),
                                                   g.position(v.nodes[std::size_t(j)]))));

  const auto s = SampleSet::from_raw({{30, 30, 0}}, {1.1}, expo);
  const KrigedField f(s, model, g);
  const VolumeSpec two({0, 1});
  const auto bl = make_block_law(f, two, expo);
  const Point u0 = g.position(0), u1 = g.position(1), us{30, 30, 0};
  const double c0 = cov(model, u0, us), c1 = cov(model, u1, us);
  CHECK(bl.sigma(0, 0) == doctest::Approx(1.0 - c0 * c0));
  CHECK(bl.sigma(1, 1) == doctest::Approx(1.0 - c1 * c1));
  CHECK(bl.sigma(0, 1) == doctest::Approx(cov(model, u0, u1) - c0 * c1));
  for (int i = 0; i < 2; ++i) CHECK(bl.sigma(i, i) == bl.laws[std::size_t(i)].sigma2_sk);

  // Nodes at samples are fixed and shift the support.
  const KrigedField at(SampleSet::from_raw({{0, 0, 0}}, {1.1}, expo), model, g);
  const auto fixed = make_block_law(at, two, expo);
  CHECK(block_support(fixed, expo).first == doctest::Approx(0.55));
  CHECK(block_pdf_exact(fixed, expo, 0.5) == 0.0);
  const double z = 0.55 + 0.5 * 0.8;
  CHECK(block_pdf_exact(fixed, expo, z) ==
        doctest::Approx(2.0 * point_pdf(fixed.laws[1], 2.0 * z - 1.1)).epsilon(1e-12));
}

TEST_CASE("errors") {
  Eigen::MatrixXd s5 = Eigen::MatrixXd::Identity(5, 5) * 0.5;
  const std::vector<double> mu5(5, 0.0);
  const auto bl5 = make_block_law(expo, mu5, s5);
  CHECK_THROWS_AS(block_pdf_exact(bl5, expo, 1.0), DimensionTooLarge);
  CHECK(block_pdf_mc(bl5, expo, 0.8, {2000, 1}).value > 0.0);

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 1.5, 1.5, 1.0;
  const std::vector<double> mu2(2, 0.0);
  CHECK_THROWS_AS(make_block_law(expo, mu2, bad), NotPSD);
  CHECK_THROWS_AS(block_pdf_mc(pair_law(expo, 0.2), expo, 1.0, {999, 1}), InputError);
}
