#include <doctest.h>

#include <cmath>
#include <set>

#include "mgvol/normal.hpp"
#include "mgvol/parallel.hpp"
#include "mgvol/quadrature.hpp"
#include "mgvol/rng.hpp"
#include "oracles.hpp"

using namespace mgvol;

TEST_CASE("normal cdf, pdf and quantile agree with reference formulas") {
  for (double x : {-7.5, -3.0, -1.0, -0.2, 0.0, 0.4, 1.7, 5.0}) {
    CHECK(normal::pdf(x) == doctest::Approx(oracle::normal_pdf(x)).epsilon(1e-14));
    CHECK(normal::cdf(x) == doctest::Approx(oracle::normal_cdf(x)).epsilon(1e-14));
    CHECK(normal::sf(x) == doctest::Approx(oracle::normal_cdf(-x)).epsilon(1e-14));
  }
  for (double p : {1e-12, 1e-5, 0.025, 0.3, 0.5, 0.8, 0.975}) {
    CHECK(normal::quantile(p) == doctest::Approx(oracle::normal_quantile(p)).epsilon(1e-11));
    CHECK(normal::quantile_sf(p) == doctest::Approx(-normal::quantile(p)).epsilon(1e-14));
  }
  CHECK(normal::quantile_sf(1e-9) == doctest::Approx(-oracle::normal_quantile(1e-9)).epsilon(1e-11));
  CHECK(normal::quantile(0.5) == 0.0);
  CHECK(std::isinf(normal::quantile(0.0)));
}

TEST_CASE("log survival stays accurate deep in the tail") {
  CHECK(normal::log_sf(0.0) == doctest::Approx(std::log(0.5)));
  CHECK(normal::log_sf(10.0) == doctest::Approx(std::log(oracle::normal_cdf(-10.0))).epsilon(1e-12));
  // Asymptotic Mills-ratio series at x = 40.
  const double x = 40.0;
  const double approx = -0.5 * x * x - std::log(x * std::sqrt(2 * M_PI)) + std::log1p(-1 / (x * x) + 3 / std::pow(x, 4) - 15 / std::pow(x, 6));
  CHECK(normal::log_sf(x) == doctest::Approx(approx).epsilon(1e-9));
  CHECK(normal::log_sf(-5.0) == doctest::Approx(std::log1p(-oracle::normal_cdf(-5.0))));
}

TEST_CASE("Gauss-Hermite rules integrate Gaussian moments exactly") {
  for (std::size_t order : {8u, 64u, 128u, 512u}) {
    const auto& rule = gauss_hermite(order);
    double w = 0.0;
    for (double v : rule.weights) w += v;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rule.integrate([](double x) { return x * x; }) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rule.integrate([](double x) { return x * x * x * x; }) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(rule.integrate([](double x) { return x * x * x; })) < 1e-12);
  }
  CHECK(gauss_hermite(512).integrate([](double x) { return std::exp(x); }) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK(&gauss_hermite(64) == &gauss_hermite(64));
}

TEST_CASE("adaptive integration") {
  CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate_adaptive([](double x) { return oracle::normal_pdf(x); }, -INFINITY, INFINITY) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate_adaptive([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("counter RNG is a pure function of seed, stream and index") {
  const CounterRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    CHECK(a.bits(i) == b.bits(i));
    CHECK(a.bits(i) != c.bits(i));
    CHECK(a.bits(i) != d.bits(i));
    seen.insert(a.bits(i));
    const double u = a.uniform(i);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  CHECK(seen.size() == 1000);
}

TEST_CASE("Philox4x32-10 known-answer vector") {
  // Random123 reference: counter 0, key 0.
  const auto out = CounterRng::philox({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
  const auto ones = CounterRng::philox({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);
  const auto pi = CounterRng::philox({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("normal variates have unit moments") {
  const CounterRng rng(7, 0);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(std::uint64_t(i));
    s1 += x;
    s2 += x * x;
  }
  CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
