#include "mgvol/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "mgvol/anamorphosis.hpp"
#include "mgvol/blocksupport.hpp"
#include "mgvol/conditional.hpp"
#include "mgvol/covariance.hpp"
#include "mgvol/error.hpp"
#include "mgvol/io.hpp"
#include "mgvol/kriging.hpp"
#include "mgvol/simulate.hpp"
#include "mgvol/stats.hpp"

namespace mgvol {

namespace {

constexpr std::size_t kDefaultZSteps = 50;
constexpr std::size_t kKsGridPoints = 80;

std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return (std::filesystem::path(cfg.out) / name).string();
}

CovarianceModel covariance(const RunConfig& cfg) {
  if (cfg.covariance.empty()) throw ConfigError("[covariance] model is required");
  return CovarianceModel::parse(cfg.covariance);
}

PointData samples_file(const RunConfig& cfg) {
  if (cfg.samples.empty()) throw ConfigError("[paths] samples is required");
  return read_samples(cfg.samples);
}

void require_variation(const std::vector<double>& values) {
  if (values.empty()) throw DegenerateData("no sample values");
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; }))
    throw DegenerateData("all sample values are equal");
}

Anamorphosis analytic_or_fitted(const AnamorphosisConfig& ac, const std::string& form,
                                const std::vector<double>* raw) {
  if (form == "lognormal") return Anamorphosis::lognormal(ac.mu, ac.sigma);
  if (form == "exponential") return Anamorphosis::exponential(ac.lambda);
  if (!raw) throw ConfigError("an empirical anamorphosis needs a samples file");
  return fit_empirical(*raw, {}, ac.z_min, ac.z_max);
}

Anamorphosis anamorphosis(const RunConfig& cfg, const std::vector<double>* raw) {
  const auto& ac = cfg.anamorphosis;
  if (ac.form != "hermite") return analytic_or_fitted(ac, ac.form, raw);
  return fit_hermite(analytic_or_fitted(ac, ac.base, raw), ac.degree);
}

struct Conditioning {
  std::unique_ptr<Anamorphosis> a;
  SampleSet samples;
  std::unique_ptr<KrigedField> field;
};

Conditioning condition(const RunConfig& cfg, std::ostream& log) {
  const PointData data = samples_file(cfg);
  require_variation(data.values);
  Conditioning c;
  c.a = std::make_unique<Anamorphosis>(anamorphosis(cfg, &data.values));
  c.samples = SampleSet::from_raw(data.positions, data.values, *c.a);
  c.field = std::make_unique<KrigedField>(c.samples, covariance(cfg), cfg.grid,
                                          KrigingOptions{cfg.max_samples});
  if (c.field->clamp_warnings() > 0)
    log << "warning: " << c.field->clamp_warnings()
        << " kriging variances clamped into [0, sill]\n";
  return c;
}

std::vector<VolumeSpec> tiles(const RunConfig& cfg) {
  if (cfg.block.tile_x == 0 || cfg.block.tile_y == 0)
    throw ConfigError("[block] tile is required (e.g. tile = 8x8)");
  auto out = VolumeSpec::tile(cfg.grid, cfg.block.tile_x, cfg.block.tile_y, cfg.block.tile_z);
  if (out.empty()) throw ConfigError("block tile larger than the grid");
  return out;
}

VolumeSpec block_nodes(const RunConfig& cfg) {
  if (cfg.block.nodes.empty()) throw ConfigError("[block] nodes (or --nodes) is required");
  return VolumeSpec(cfg.block.nodes);
}

std::vector<double> default_zgrid(const BlockLaw& bl) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& law : bl.laws) {
    lo = std::min(lo, point_quantile(law, 1e-4));
    hi = std::max(hi, point_quantile(law, 1.0 - 1e-4));
  }
  if (!(hi > lo)) throw DegenerateLaw("block average is a point mass");
  return ZGrid{lo, hi, kDefaultZSteps}.points();
}

// Block statistics for one tile: first cell, centre and node count.
std::vector<double> block_row(const Grid& grid, std::size_t index, const VolumeSpec& v) {
  const auto cell = grid.cell(v.nodes.front());
  Point centre{0.0, 0.0, 0.0};
  for (auto node : v.nodes) {
    const Point p = grid.position(node);
    for (int d = 0; d < 3; ++d) centre[d] += p[d] / double(v.size());
  }
  std::vector<double> row{double(index), double(cell[0]), double(cell[1])};
  if (grid.dims == 3) row.push_back(double(cell[2]));
  row.insert(row.end(), {centre[0], centre[1]});
  if (grid.dims == 3) row.push_back(centre[2]);
  row.push_back(double(v.size()));
  return row;
}

std::vector<std::string> block_header(const Grid& grid) {
  if (grid.dims == 3) return {"block", "ix", "iy", "iz", "x", "y", "z", "nodes"};
  return {"block", "ix", "iy", "x", "y", "nodes"};
}

// Exact cdf on a grid spanning [lo, hi], linearly interpolated.
class TabulatedCdf {
 public:
  TabulatedCdf(const BlockLaw& bl, const Anamorphosis& a, double lo, double hi) {
    const auto grid = ZGrid{lo, hi, kKsGridPoints}.points();
    z_ = grid;
    for (double z : grid) f_.push_back(block_cdf_exact(bl, a, z));
  }
  double operator()(double z) const {
    if (z <= z_.front()) return f_.front();
    if (z >= z_.back()) return f_.back();
    const auto it = std::upper_bound(z_.begin(), z_.end(), z);
    const std::size_t k = std::size_t(it - z_.begin());
    const double t = (z - z_[k - 1]) / (z_[k] - z_[k - 1]);
    return f_[k - 1] + t * (f_[k] - f_[k - 1]);
  }

 private:
  std::vector<double> z_, f_;
};

struct Check {
  std::string metric;
  double value;
  std::string relation;
  double threshold;
  bool pass;
};

void write_report(const std::string& path, const std::vector<Check>& checks) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << "metric,value,relation,threshold,pass\n";
  for (const auto& c : checks)
    out << c.metric << ',' << format_number(c.value) << ',' << c.relation << ','
        << format_number(c.threshold) << ',' << (c.pass ? "true" : "false") << '\n';
}

}  // namespace

RunConfig apply_overrides(RunConfig cfg, const Overrides& o) {
  if (o.out) cfg.out = *o.out;
  if (o.seed) cfg.mc.seed = cfg.simulate.seed = *o.seed;
  if (o.draws) cfg.mc.draws = *o.draws;
  if (o.allow_large) cfg.simulate.allow_large = true;
  if (o.zgrid) cfg.block.zgrid = ZGrid::parse(*o.zgrid);
  if (o.nodes) cfg.block.nodes = parse_node_list(*o.nodes, cfg.grid, "--nodes");
  return cfg;
}

int cmd_transform(const RunConfig& cfg, std::ostream& log) {
  const PointData data = samples_file(cfg);
  require_variation(data.values);
  const Anamorphosis a = anamorphosis(cfg, &data.values);

  CsvTable table;
  table.header = data.dims == 3 ? std::vector<std::string>{"x", "y", "z"}
                                : std::vector<std::string>{"x", "y"};
  table.header.insert(table.header.end(), {"value", "score", "roundtrip_error"});
  double worst = 0.0;
  for (std::size_t i = 0; i < data.values.size(); ++i) {
    const double score = a.forward(data.values[i]);
    const double error = a.backward(score) - data.values[i];
    worst = std::max(worst, std::abs(error));
    const Point& p = data.positions[i];
    std::vector<double> row{p[0], p[1]};
    if (data.dims == 3) row.push_back(p[2]);
    row.insert(row.end(), {data.values[i], score, error});
    table.rows.push_back(std::move(row));
  }
  write_csv(out_path(cfg, "scores.csv"), table);

  if (const auto* e = a.as_empirical()) {
    CsvTable t;
    t.header = {"z", "y"};
    for (std::size_t i = 0; i < e->z.size(); ++i) t.rows.push_back({e->z[i], e->y[i]});
    write_csv(out_path(cfg, "anamorphosis.csv"), t);
  }
  log << "anamorphosis: " << a.describe() << "\n"
      << "samples: " << data.values.size() << ", max round-trip error " << worst << "\n";
  return 0;
}

int cmd_krige(const RunConfig& cfg, std::ostream& log) {
  const Conditioning c = condition(cfg, log);
  const auto& f = *c.field;
  const std::vector<double> ys(f.y_star_map().begin(), f.y_star_map().end());
  const std::vector<double> s2(f.sigma2_map().begin(), f.sigma2_map().end());
  write_csv(out_path(cfg, "krige.csv"), map_table(cfg.grid, {"y_star", "sigma2_sk"}, {ys, s2}));
  log << "kriged " << f.node_count() << " nodes from " << c.samples.size() << " samples\n";
  return 0;
}

int cmd_moments(const RunConfig& cfg, std::ostream& log) {
  const Conditioning c = condition(cfg, log);
  const auto& f = *c.field;
  const std::vector<double> ys(f.y_star_map().begin(), f.y_star_map().end());
  const std::vector<double> s2(f.sigma2_map().begin(), f.sigma2_map().end());
  const auto mean = conditional_mean_map(f, *c.a);
  const auto var = conditional_variance_map(f, *c.a);
  write_csv(out_path(cfg, "moments.csv"),
            map_table(cfg.grid, {"y_star", "sigma2_sk", "mean", "variance"}, {ys, s2, mean, var}));
  log << "conditional moments for " << f.node_count() << " nodes\n";
  return 0;
}

int cmd_volvar(const RunConfig& cfg, std::ostream& log) {
  const Conditioning c = condition(cfg, log);
  const auto blocks = tiles(cfg);
  PairCovarianceCache cache;
  CsvTable table;
  table.header = block_header(cfg.grid);
  table.header.insert(table.header.end(), {"mean", "variance"});
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& v = blocks[b];
    double mean = 0.0;
    for (auto node : v.nodes) mean += conditional_mean(node_law(*c.field, node, *c.a));
    mean /= double(v.size());
    auto row = block_row(cfg.grid, b, v);
    row.push_back(mean);
    row.push_back(volume_variance(*c.field, v, *c.a, &cache));
    table.rows.push_back(std::move(row));
  }
  write_csv(out_path(cfg, "volvar.csv"), table);
  log << "volume variance for " << blocks.size() << " blocks\n";
  return 0;
}

int cmd_blockdist(const RunConfig& cfg, std::ostream& log) {
  const Conditioning c = condition(cfg, log);
  const VolumeSpec volume = block_nodes(cfg);
  const BlockLaw bl = make_block_law(*c.field, volume, *c.a);
  const auto zs = cfg.block.zgrid ? cfg.block.zgrid->points() : default_zgrid(bl);
  const McOptions mc{cfg.mc.draws, cfg.mc.seed, true};
  const auto pdf = block_pdf_mc_curve(bl, *c.a, zs, mc);
  const auto cdf = block_cdf_curve(bl, *c.a, zs, mc);
  const bool exact = bl.size() <= kMaxExactNodes;

  CsvTable table;
  table.header = {"z", "density", "se", "cdf", "cdf_se"};
  if (exact) table.header.insert(table.header.end(), {"density_exact", "cdf_exact"});
  for (std::size_t k = 0; k < zs.size(); ++k) {
    std::vector<double> row{zs[k], pdf[k].value, pdf[k].se, cdf[k].value, cdf[k].se};
    if (exact) {
      row.push_back(block_pdf_exact(bl, *c.a, zs[k]));
      row.push_back(block_cdf_exact(bl, *c.a, zs[k]));
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(out_path(cfg, "blockdist.csv"), table);
  log << "block of " << bl.size() << " nodes: mean " << block_mean(bl) << ", variance "
      << block_variance(bl) << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  const auto& sc = cfg.simulate;
  const SimulationOptions options{sc.node_cap, sc.allow_large};
  RealizationSet set;
  std::unique_ptr<Anamorphosis> a;
  if (sc.mode == "conditional") {
    Conditioning c = condition(cfg, log);
    set = lu_conditional(*c.field, sc.realizations, sc.seed, options);
    a = std::move(c.a);
  } else {
    set = lu_unconditional(cfg.grid, covariance(cfg), sc.realizations, sc.seed, options);
    const bool analytic = cfg.anamorphosis.form == "lognormal" ||
                          cfg.anamorphosis.form == "exponential";
    if (analytic) a = std::make_unique<Anamorphosis>(anamorphosis(cfg, nullptr));
  }
  write_realizations(out_path(cfg, "realizations.bin"), set);

  std::vector<std::string> names{"gaussian_mean", "gaussian_variance"};
  std::vector<std::vector<double>> columns{ensemble_mean(set)};
  columns.push_back(set.realizations() > 1 ? ensemble_variance(set)
                                           : std::vector<double>(set.node_count(), 0.0));
  if (a) {
    const RealizationSet raw = backtransform(set, *a);
    names.insert(names.end(), {"raw_mean", "raw_variance"});
    columns.push_back(ensemble_mean(raw));
    columns.push_back(raw.realizations() > 1 ? ensemble_variance(raw)
                                             : std::vector<double>(raw.node_count(), 0.0));
  }
  write_csv(out_path(cfg, "simulate_summary.csv"), map_table(cfg.grid, names, columns));
  log << sc.mode << " simulation: " << set.realizations() << " realizations of "
      << set.node_count() << " nodes\n";
  return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& log, const ValidationThresholds& th) {
  const auto& sc = cfg.simulate;
  const SimulationOptions options{sc.node_cap, sc.allow_large};
  const CovarianceModel model = covariance(cfg);

  // Conditioning data: the samples file, or a synthetic truth sampled at random.
  Conditioning c;
  if (!cfg.samples.empty()) {
    c = condition(cfg, log);
  } else {
    c.a = std::make_unique<Anamorphosis>(anamorphosis(cfg, nullptr));
    const RealizationSet truth = lu_unconditional(cfg.grid, model, 1, sc.seed, options);
    c.samples = sample_from_realization(truth, 0, sc.sample_count, sc.seed, c.a.get());
    c.field = std::make_unique<KrigedField>(c.samples, model, cfg.grid,
                                            KrigingOptions{cfg.max_samples});
    CsvTable t;
    t.header = {"x", "y", "z", "value", "score"};
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
      const Point& p = c.samples.positions[i];
      t.rows.push_back({p[0], p[1], p[2], c.samples.raw[i], c.samples.scores[i]});
    }
    write_csv(out_path(cfg, "validate_samples.csv"), t);
  }
  const KrigedField& field = *c.field;
  const Anamorphosis& a = *c.a;

  const RealizationSet raw =
      backtransform(lu_conditional(field, sc.realizations, sc.seed, options), a);
  const auto sim_mean = ensemble_mean(raw);
  const auto sim_var = ensemble_variance(raw);
  const auto ana_mean = conditional_mean_map(field, a);
  const auto ana_var = conditional_variance_map(field, a);
  const std::vector<double> s2(field.sigma2_map().begin(), field.sigma2_map().end());
  write_csv(out_path(cfg, "validate_nodes.csv"),
            map_table(cfg.grid,
                      {"sigma2_sk", "mean_analytic", "mean_simulated", "variance_analytic",
                       "variance_simulated"},
                      {s2, ana_mean, sim_mean, ana_var, sim_var}));

  std::vector<double> am, sm, av, sv;
  for (std::size_t i = 0; i < field.node_count(); ++i) {
    if (s2[i] < th.min_sigma2) continue;
    am.push_back(ana_mean[i]);
    sm.push_back(sim_mean[i]);
    av.push_back(ana_var[i]);
    sv.push_back(sim_var[i]);
  }
  std::vector<Check> checks;
  auto at_least = [&](std::string m, double v, double t) {
    checks.push_back({std::move(m), v, ">=", t, v >= t});
  };
  auto at_most = [&](std::string m, double v, double t) {
    checks.push_back({std::move(m), v, "<=", t, v <= t});
  };
  if (am.size() < 3) throw DegenerateData("fewer than three nodes with sigma2_sk >= " +
                                          format_number(th.min_sigma2));
  at_least("variance_pearson_r", pearson(av, sv), th.variance_r);
  at_most("variance_mean_relative_deviation", mean_relative_deviation(av, sv),
          th.max_relative_deviation);
  at_least("mean_pearson_r", pearson(am, sm), th.mean_r);
  at_most("mean_mean_relative_deviation", mean_relative_deviation(am, sm),
          th.max_relative_deviation);

  if (cfg.block.tile_x > 0) {
    const auto blocks = tiles(cfg);
    PairCovarianceCache cache;
    CsvTable table;
    table.header = block_header(cfg.grid);
    table.header.insert(table.header.end(),
                        {"variance_analytic", "variance_simulated", "se", "pass"});
    std::size_t passed = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto averages = block_average(raw, blocks[b]);
      const double analytic = volume_variance(field, blocks[b], a, &cache);
      const double simulated = sample_variance(averages);
      const double se = sample_variance_se(averages);
      const bool ok = std::abs(simulated - analytic) <= th.block_se_multiple * se;
      passed += ok;
      auto row = block_row(cfg.grid, b, blocks[b]);
      row.insert(row.end(), {analytic, simulated, se, ok ? 1.0 : 0.0});
      table.rows.push_back(std::move(row));
    }
    write_csv(out_path(cfg, "validate_blocks.csv"), table);
    at_least("block_variance_pass_fraction", double(passed) / double(blocks.size()),
             th.block_pass_fraction);
  }

  if (!cfg.block.nodes.empty()) {
    const VolumeSpec volume = block_nodes(cfg);
    const BlockLaw bl = make_block_law(field, volume, a);
    if (bl.size() <= kMaxExactNodes) {
      auto averages = block_average(raw, volume);
      std::sort(averages.begin(), averages.end());
      const TabulatedCdf cdf(bl, a, averages.front(), averages.back());
      CsvTable t;
      t.header = {"z", "ecdf", "cdf_exact"};
      for (std::size_t k = 0; k < averages.size(); ++k)
        t.rows.push_back({averages[k], double(k + 1) / double(averages.size()), cdf(averages[k])});
      write_csv(out_path(cfg, "validate_blockdist.csv"), t);
      at_most("block_distribution_ks", ks_distance(averages, cdf), th.max_ks);
    } else {
      log << "block node list longer than " << kMaxExactNodes << ": KS check skipped\n";
    }
  }

  write_report(out_path(cfg, "validate_report.csv"), checks);
  bool all = true;
  for (const auto& ch : checks) {
    log << (ch.pass ? "PASS " : "FAIL ") << ch.metric << " = " << ch.value << " (" << ch.relation
        << " " << ch.threshold << ")\n";
    all = all && ch.pass;
  }
  return all ? 0 : 1;
}

int run_command(const std::string& verb, const RunConfig& cfg, std::ostream& log) {
  if (verb == "transform") return cmd_transform(cfg, log);
  if (verb == "krige") return cmd_krige(cfg, log);
  if (verb == "moments") return cmd_moments(cfg, log);
  if (verb == "volvar") return cmd_volvar(cfg, log);
  if (verb == "blockdist") return cmd_blockdist(cfg, log);
  if (verb == "simulate") return cmd_simulate(cfg, log);
  if (verb == "validate") return cmd_validate(cfg, log);
  throw InputError("unknown command '" + verb + "'");
}

}  // namespace mgvol
