// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
//
// usage: mgvol_acceptance <replica.ini> [scratch dir]

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mgvol/anamorphosis.hpp"
#include "mgvol/blocksupport.hpp"
#include "mgvol/commands.hpp"
#include "mgvol/conditional.hpp"
#include "mgvol/hermite.hpp"
#include "mgvol/io.hpp"
#include "mgvol/kriging.hpp"
#include "mgvol/quadrature.hpp"
#include "mgvol/stats.hpp"
#include "oracles.hpp"

using namespace mgvol;
namespace fs = std::filesystem;

namespace {

// Criterion 1
constexpr double kMinSigma2 = 0.05;
constexpr double kVarianceR = 0.98;
constexpr double kMeanR = 0.99;
constexpr double kMaxMrd = 0.05;
constexpr double kMaxSeconds = 600.0;
// Criterion 2
constexpr double kBlockSeMultiple = 4.0;
constexpr double kBlockPassFraction = 0.95;
// Criterion 3
constexpr double kMaxKs = 0.05;
constexpr std::size_t kMcDraws = 1000000;
constexpr double kMcSeMultiple = 4.0;
constexpr std::size_t kMcPoints = 50;
constexpr double kExactRelTol = 1e-6;  // adaptive quadrature tolerance of the exact pdf
// Criterion 4
constexpr double kLognormalRelTol = 1e-8;
// Criterion 5
constexpr double kOrthoTol = 1e-10;
constexpr double kRecurrenceTol = 1e-9;
constexpr double kShiftTol = 1e-8;
constexpr double kGeneratingTol = 1e-8;
constexpr double kHermiteMeanRelTol = 1e-6;
// Criterion 6
constexpr double kScoreTol = 1e-8;
constexpr double kZeroVariance = 1e-10;
constexpr double kMinEigen = -1e-8;

struct Result {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Result> results;

void report(int id, std::string name, bool pass, std::string detail) {
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << name << "  "
            << detail << std::endl;
  results.push_back({id, std::move(name), pass, std::move(detail)});
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double relative(double value, double expected) {
  return std::abs(value - expected) / std::abs(expected);
}

void criterion_1(const fs::path& out, double seconds) {
  const auto t = read_csv((out / "validate_nodes.csv").string());
  const auto s2 = t.values("sigma2_sk");
  const auto ma = t.values("mean_analytic"), ms = t.values("mean_simulated");
  const auto va = t.values("variance_analytic"), vs = t.values("variance_simulated");
  std::vector<double> am, sm, av, sv;
  for (std::size_t i = 0; i < s2.size(); ++i) {
    if (s2[i] < kMinSigma2) continue;
    am.push_back(ma[i]);
    sm.push_back(ms[i]);
    av.push_back(va[i]);
    sv.push_back(vs[i]);
  }
  const double rv = pearson(av, sv), dv = mean_relative_deviation(av, sv);
  const double rm = pearson(am, sm), dm = mean_relative_deviation(am, sm);
  const bool pass = t.rows.size() == 64 * 64 && rv >= kVarianceR && dv <= kMaxMrd &&
                    rm >= kMeanR && dm <= kMaxMrd && seconds <= kMaxSeconds;
  report(1, "replica node scatter", pass,
         "nodes=" + std::to_string(av.size()) + " variance r=" + fmt(rv) + " mrd=" + fmt(dv) +
             " mean r=" + fmt(rm) + " mrd=" + fmt(dm) + " runtime=" + fmt(seconds) + "s");
}

void criterion_2(const fs::path& out) {
  const auto t = read_csv((out / "validate_blocks.csv").string());
  const auto ana = t.values("variance_analytic"), sim = t.values("variance_simulated");
  const auto se = t.values("se"), nodes = t.values("nodes");
  std::size_t passed = 0;
  bool sizes = true;
  for (std::size_t b = 0; b < ana.size(); ++b) {
    passed += std::abs(sim[b] - ana[b]) <= kBlockSeMultiple * se[b];
    sizes = sizes && nodes[b] == 64.0;
  }
  const double fraction = ana.empty() ? 0.0 : double(passed) / double(ana.size());
  report(2, "8x8 block volume variance", ana.size() == 64 && sizes && fraction >= kBlockPassFraction,
         "blocks=" + std::to_string(ana.size()) + " within 4 SE=" + std::to_string(passed) +
             " fraction=" + fmt(fraction));
}

void criterion_3(const RunConfig& cfg, const fs::path& out) {
  // KS of the simulated block averages against the exact cdf.
  const auto t = read_csv((out / "validate_blockdist.csv").string());
  const auto z = t.values("z"), f = t.values("cdf_exact");
  double ks = 0.0;
  const double n = double(z.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    ks = std::max({ks, std::abs(double(k + 1) / n - f[k]), std::abs(double(k) / n - f[k])});

  // Rebuild the conditioned field from the drawn samples.
  const auto s = read_csv((out / "validate_samples.csv").string());
  const auto xs = s.values("x"), ys = s.values("y"), zs = s.values("z"), raw = s.values("value");
  std::vector<Point> positions;
  for (std::size_t i = 0; i < xs.size(); ++i) positions.push_back({xs[i], ys[i], zs[i]});
  const Anamorphosis a = Anamorphosis::exponential(cfg.anamorphosis.lambda);
  const KrigedField field(SampleSet::from_raw(positions, raw, a),
                          CovarianceModel::parse(cfg.covariance), cfg.grid);
  const BlockLaw bl = make_block_law(field, VolumeSpec(cfg.block.nodes), a);

  double lo = INFINITY, hi = -INFINITY;
  for (const auto& law : bl.laws) {
    lo = std::min(lo, point_quantile(law, 1e-4));
    hi = std::max(hi, point_quantile(law, 1.0 - 1e-4));
  }
  std::vector<double> grid(kMcPoints);
  for (std::size_t k = 0; k < kMcPoints; ++k)
    grid[k] = lo + (hi - lo) * double(k) / double(kMcPoints - 1);
  const auto mc = block_pdf_mc_curve(bl, a, grid, McOptions{kMcDraws, cfg.mc.seed, true});
  std::size_t within = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < kMcPoints; ++k) {
    const double exact = block_pdf_exact(bl, a, grid[k]);
    const double allowed = kMcSeMultiple * mc[k].se + kExactRelTol * exact;
    const double diff = std::abs(mc[k].value - exact);
    within += diff <= allowed;
    if (mc[k].se > 0.0) worst = std::max(worst, diff / mc[k].se);
  }
  report(3, "block distribution of 4 nodes",
         bl.size() == 4 && z.size() == 2000 && ks <= kMaxKs && within == kMcPoints,
         "ks=" + fmt(ks) + " (n=" + std::to_string(z.size()) + ") mc within 4 SE=" +
             std::to_string(within) + "/" + std::to_string(kMcPoints) +
             " worst |mc-exact|/se=" + fmt(worst));
}

void criterion_4() {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> uy(-2.0, 2.0), uv(0.05, 1.0), umu(-1.0, 1.0),
      us(0.3, 1.2), uc(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const oracle::Lognormal o{umu(gen), us(gen)};
    const Anamorphosis a = Anamorphosis::lognormal(o.mu, o.s);
    const double yi = uy(gen), vi = uv(gen), yj = uy(gen), vj = uv(gen);
    const double rho = uc(gen) * std::sqrt(vi * vj);
    const PointLaw li(a, yi, vi), lj(a, yj, vj);
    worst = std::max({worst, relative(conditional_mean(li), o.mean(yi, vi)),
                      relative(conditional_variance(li), o.variance(yi, vi)),
                      relative(pair_covariance(li, lj, rho), o.covariance(yi, vi, yj, vj, rho))});
  }
  report(4, "lognormal closed forms", worst <= kLognormalRelTol,
         "100 laws, worst relative error=" + fmt(worst));
}

// Complex-step derivative of H_n through the same three-term recurrence.
double hermite_derivative_oracle(int n, double y) {
  const double h = 1e-30;
  using C = std::complex<double>;
  const C x(y, h);
  C prev(1.0, 0.0), cur = -x;
  if (n == 0) return 0.0;
  for (int k = 1; k < n; ++k) {
    const C next = -(x * cur + std::sqrt(double(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur.imag() / h;
}

void criterion_5() {
  std::mt19937_64 gen(5);

  double ortho = 0.0;
  const auto& rule = gauss_hermite(512);
  std::vector<std::vector<double>> hs;
  for (double x : rule.nodes) hs.push_back(hermite_batch(20, x));
  for (int n = 0; n <= 20; ++n)
    for (int p = 0; p <= 20; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i)
        s += rule.weights[i] * hs[i][std::size_t(n)] * hs[i][std::size_t(p)];
      ortho = std::max(ortho, std::abs(s - (n == p ? 1.0 : 0.0)));
    }

  double three_term = 0.0, derivative = 0.0;
  std::uniform_real_distribution<double> uy(-4.0, 4.0);
  for (int k = 0; k < 100; ++k) {
    const double y = uy(gen);
    const auto h = hermite_batch(51, y);
    for (int n = 1; n <= 50; ++n) {
      const double r = std::sqrt(n + 1.0) * h[n + 1] + y * h[n] + std::sqrt(double(n)) * h[n - 1];
      three_term = std::max(three_term, std::abs(r) / std::max(1.0, std::abs(h[n + 1])));
      std::vector<double> unit(std::size_t(n) + 1, 0.0);
      unit.back() = 1.0;
      const double d = HermiteSeries(unit).derivative(y);
      const double oracle = hermite_derivative_oracle(n, y);
      derivative = std::max({derivative,
                             std::abs(d - oracle) / std::max(1.0, std::abs(oracle)),
                             std::abs(-std::sqrt(double(n)) * h[n - 1] - oracle) /
                                 std::max(1.0, std::abs(oracle))});
    }
  }

  double shift = 0.0;
  std::uniform_real_distribution<double> ua(-2.0, 2.0), ub(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double a = ua(gen), b = ub(gen);
    for (int p = 0; p <= 30; ++p) {
      const auto c = shift_stretch(p, a, b);
      for (double y = -4.0; y <= 4.0; y += 0.5) {
        const auto h = hermite_batch(p, y);
        double s = 0.0;
        for (int n = 0; n <= p; ++n) s += c[std::size_t(n)] * h[std::size_t(n)];
        const double expected = hermite_eval(p, a + b * y);
        shift = std::max(shift, std::abs(s - expected) / std::max(1.0, std::abs(expected)));
      }
    }
  }

  double generating = 0.0;
  for (double lambda = -2.0; lambda <= 2.0; lambda += 0.25)
    for (double y = -2.0; y <= 2.0; y += 0.25) {
      const auto h = hermite_batch(60, y);
      double sum = 0.0;
      for (int n = 0; n <= 60; ++n)
        sum += std::pow(-lambda, n) * h[std::size_t(n)] / std::exp(0.5 * std::lgamma(n + 1.0));
      generating = std::max(generating, relative(std::exp(lambda * lambda / 2) * sum, std::exp(lambda * y)));
    }

  const Anamorphosis exact = Anamorphosis::lognormal(0.0, 1.0);
  const auto series = fit_hermite(exact, 100).as_hermite()->series;
  double mean = 0.0;
  std::uniform_real_distribution<double> um(-2.0, 2.0), uv(0.05, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double y = um(gen), v = uv(gen);
    mean = std::max(mean, relative(hermite_conditional_mean(series, y, std::sqrt(v)),
                                   conditional_mean(PointLaw(exact, y, v))));
  }

  report(5, "hermite suite",
         ortho <= kOrthoTol && three_term <= kRecurrenceTol && derivative <= kRecurrenceTol &&
             shift <= kShiftTol && generating <= kGeneratingTol && mean <= kHermiteMeanRelTol,
         "orthonormality=" + fmt(ortho) + " three-term=" + fmt(three_term) +
             " derivative=" + fmt(derivative) + " shift/stretch=" + fmt(shift) +
             " generating=" + fmt(generating) + " mean=" + fmt(mean));
}

void criterion_6(const RunConfig& cfg, const fs::path& out) {
  const auto s = read_csv((out / "validate_samples.csv").string());
  const auto xs = s.values("x"), ys = s.values("y"), zs = s.values("z");
  const auto raw = s.values("value"), scores = s.values("score");
  std::vector<Point> positions;
  for (std::size_t i = 0; i < xs.size(); ++i) positions.push_back({xs[i], ys[i], zs[i]});
  const Anamorphosis a = Anamorphosis::exponential(cfg.anamorphosis.lambda);
  const auto model = CovarianceModel::parse(cfg.covariance);
  const KrigedField field(SampleSet::from_raw(positions, raw, a), model, cfg.grid);

  std::size_t exact = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const std::size_t ix = std::size_t(std::lround((xs[i] - cfg.grid.origin[0]) / cfg.grid.spacing[0]));
    const std::size_t iy = std::size_t(std::lround((ys[i] - cfg.grid.origin[1]) / cfg.grid.spacing[1]));
    const std::size_t node = cfg.grid.index(ix, iy);
    exact += std::abs(field.y_star(node) - scores[i]) <= kScoreTol &&
             field.sigma2(node) <= kZeroVariance;
  }

  std::mt19937_64 gen(6);
  std::uniform_int_distribution<std::size_t> un(0, cfg.grid.node_count() - 1), usize(1, 6);
  double min_eigen = INFINITY;
  for (int k = 0; k < 200; ++k) {
    std::vector<std::size_t> nodes(usize(gen));
    for (auto& n : nodes) n = un(gen);
    const Eigen::MatrixXd m = field.cross_covariance_matrix(nodes);
    min_eigen = std::min(min_eigen, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff());
  }

  const KrigedField empty(SampleSet{}, model, cfg.grid);
  bool prior = true;
  for (std::size_t i = 0; i < empty.node_count(); ++i)
    prior = prior && empty.y_star(i) == 0.0 && empty.sigma2(i) == 1.0;

  report(6, "kriging properties",
         positions.size() == 100 && exact == positions.size() && min_eigen >= kMinEigen && prior,
         "exact at " + std::to_string(exact) + "/" + std::to_string(positions.size()) +
             " samples, min eigenvalue=" + fmt(min_eigen) + ", no-data prior " +
             (prior ? "exact" : "wrong"));
}

void criterion_7(const fs::path& first, const fs::path& second) {
  std::size_t files = 0, same = 0;
  for (const auto& entry : fs::directory_iterator(first)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const fs::path other = second / entry.path().filename();
    same += fs::exists(other) && slurp(entry.path()) == slurp(other);
  }
  report(7, "validate reproducibility", files >= 5 && same == files,
         std::to_string(same) + "/" + std::to_string(files) + " CSV files byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: mgvol_acceptance <replica.ini> [scratch dir]\n";
    return 2;
  }
  try {
    const fs::path scratch =
        argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "mgvol_acceptance";
    fs::remove_all(scratch);
    const RunConfig base = load_config(argv[1]);
    Overrides o;
    o.out = (scratch / "run1").string();
    const RunConfig cfg = apply_overrides(base, o);
    o.out = (scratch / "run2").string();
    const RunConfig again = apply_overrides(base, o);

    ValidationThresholds th;
    th.min_sigma2 = kMinSigma2;
    th.variance_r = kVarianceR;
    th.mean_r = kMeanR;
    th.max_relative_deviation = kMaxMrd;
    th.block_se_multiple = kBlockSeMultiple;
    th.block_pass_fraction = kBlockPassFraction;
    th.max_ks = kMaxKs;

    std::ostringstream log;
    const auto start = std::chrono::steady_clock::now();
    cmd_validate(cfg, log, th);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    criterion_1(cfg.out, seconds);
    criterion_2(cfg.out);
    criterion_3(cfg, cfg.out);
    criterion_4();
    criterion_5();
    criterion_6(cfg, cfg.out);
    cmd_validate(again, log, th);
    criterion_7(cfg.out, again.out);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.pass;
  std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
  return passed == results.size() && results.size() == 7 ? 0 : 1;
}
