#include "mgvol/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mgvol/error.hpp"

namespace mgvol {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Typed access to one section; records which keys were consumed.
class Section {
 public:
  Section(const IniData& ini, std::string name) : name_(std::move(name)) {
    const auto it = ini.find(name_);
    if (it != ini.end()) values_ = &it->second;
  }
  ~Section() = default;

  bool has(const std::string& key) const { return values_ && values_->count(key); }

  std::string text(const std::string& key) {
    used_.insert(key);
    return values_->at(key);
  }

  double real(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    double out = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
      throw ConfigError(where(key) + ": '" + v + "' is not a number");
    return out;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    std::uint64_t out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
      throw ConfigError(where(key) + ": '" + v + "' is not a nonnegative integer");
    return out;
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = lower(text(key));
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(where(key) + ": '" + v + "' is not a boolean");
  }

  void reject_unknown() const {
    if (!values_) return;
    for (const auto& [key, value] : *values_)
      if (!used_.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
  }

  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

 private:
  std::string name_;
  const std::map<std::string, std::string>* values_ = nullptr;
  std::set<std::string> used_;
};

std::string resolve(const std::string& base, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return p.string();
  return (std::filesystem::path(base) / p).lexically_normal().string();
}

std::vector<std::string> tokens(const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ';', ' ');
  std::stringstream ss(s);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

std::size_t parse_index(const std::string& text, const std::string& where) {
  std::size_t v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw ConfigError(where + ": '" + text + "' is not an index");
  return v;
}

// "a[,b[,c]]"; missing entries repeat the last one, or take `fill` when >= 0.
Point triple(const std::string& text, double fill, const std::string& where) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    double x = 0.0;
    const auto r = std::from_chars(part.data(), part.data() + part.size(), x);
    if (r.ec != std::errc() || r.ptr != part.data() + part.size())
      throw ConfigError(where + ": '" + part + "' is not a number");
    v.push_back(x);
  }
  if (v.empty() || v.size() > 3) throw ConfigError(where + ": expected 1 to 3 numbers");
  Point p{};
  for (std::size_t i = 0; i < 3; ++i)
    p[i] = i < v.size() ? v[i] : (fill >= 0.0 ? fill : v.back());
  return p;
}

}  // namespace

std::vector<std::size_t> parse_node_list(const std::string& text, const Grid& grid,
                                         const std::string& where) {
  std::vector<std::size_t> out;
  for (const auto& tok : tokens(text)) {
    std::vector<std::size_t> parts;
    std::stringstream ss(tok);
    std::string part;
    while (std::getline(ss, part, ',')) parts.push_back(parse_index(part, where));
    std::size_t node = 0;
    if (parts.size() == 1) {
      node = parts[0];
    } else if (parts.size() == 2 || parts.size() == 3) {
      const std::size_t iz = parts.size() == 3 ? parts[2] : 0;
      if (parts[0] >= grid.nx || parts[1] >= grid.ny || iz >= grid.nz)
        throw ConfigError(where + ": cell '" + tok + "' outside the grid");
      node = grid.index(parts[0], parts[1], iz);
    } else {
      throw ConfigError(where + ": cannot read node '" + tok + "'");
    }
    if (node >= grid.node_count()) throw ConfigError(where + ": node " + tok + " outside the grid");
    out.push_back(node);
  }
  return out;
}


IniData parse_ini(const std::string& text) {
  IniData ini;
  std::stringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // '#' starts a comment anywhere; ';' only at the start of a line, since
    // node lists use it as a separator.
    std::string content = trim(line.substr(0, line.find('#')));
    if (!content.empty() && content.front() == ';') content.clear();
    if (content.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (content.front() == '[') {
      if (content.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = lower(trim(content.substr(1, content.size() - 2)));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      ini[section];
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside any section");
    const std::string key = lower(trim(content.substr(0, eq)));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!ini[section].emplace(key, value).second)
      throw ConfigError(where + ": repeated key '" + key + "'");
  }
  return ini;
}

ZGrid ZGrid::parse(const std::string& text) {
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c) )
    throw ConfigError("z grid must read min:max:steps, got '" + text + "'");
  ZGrid g;
  try {
    std::size_t pos = 0;
    g.min = std::stod(a, &pos);
    if (pos != a.size()) throw std::invalid_argument(a);
    g.max = std::stod(b, &pos);
    if (pos != b.size()) throw std::invalid_argument(b);
    g.steps = std::size_t(std::stoul(c, &pos));
    if (pos != c.size()) throw std::invalid_argument(c);
  } catch (const std::logic_error&) {
    throw ConfigError("z grid must read min:max:steps, got '" + text + "'");
  }
  if (!(g.max > g.min) || g.steps < 2) throw ConfigError("z grid needs min < max and steps >= 2");
  return g;
}

std::vector<double> ZGrid::points() const {
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i)
    out[i] = min + (max - min) * double(i) / double(steps - 1);
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  const IniData ini = parse_ini(text);
  static const std::set<std::string> known = {"paths",  "grid", "covariance", "anamorphosis",
                                              "kriging", "block", "mc",        "simulate"};
  for (const auto& [name, keys] : ini)
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");

  RunConfig cfg;

  Section paths(ini, "paths");
  if (paths.has("samples")) cfg.samples = resolve(base_dir, paths.text("samples"));
  if (paths.has("out")) cfg.out = paths.text("out");
  cfg.out = resolve(base_dir, cfg.out);
  paths.reject_unknown();
  if (!cfg.samples.empty() && !std::filesystem::exists(cfg.samples))
    throw ConfigError("samples file " + cfg.samples + " does not exist");

  Section grid(ini, "grid");
  cfg.grid.nx = grid.count("nx", 1);
  cfg.grid.ny = grid.count("ny", 1);
  cfg.grid.nz = grid.count("nz", 1);
  if (grid.has("origin")) cfg.grid.origin = triple(grid.text("origin"), 0.0, grid.where("origin"));
  if (grid.has("spacing"))
    cfg.grid.spacing = triple(grid.text("spacing"), -1.0, grid.where("spacing"));
  cfg.grid.dims = cfg.grid.nz > 1 ? 3 : 2;
  grid.reject_unknown();
  if (cfg.grid.nx == 0 || cfg.grid.ny == 0 || cfg.grid.nz == 0)
    throw ConfigError("grid dimensions must be positive");
  for (double s : cfg.grid.spacing)
    if (!(s > 0.0)) throw ConfigError("grid spacing must be positive");

  Section cov(ini, "covariance");
  if (cov.has("structures")) cfg.covariance = cov.text("structures");
  cov.reject_unknown();

  Section an(ini, "anamorphosis");
  auto& ac = cfg.anamorphosis;
  if (an.has("form")) ac.form = lower(an.text("form"));
  ac.mu = an.real("mu", ac.mu);
  ac.sigma = an.real("sigma", ac.sigma);
  ac.lambda = an.real("lambda", ac.lambda);
  if (an.has("zmin")) ac.z_min = an.real("zmin", 0.0);
  if (an.has("zmax")) ac.z_max = an.real("zmax", 0.0);
  ac.degree = int(an.count("hermite_degree", std::uint64_t(ac.degree)));
  if (an.has("base")) ac.base = lower(an.text("base"));
  an.reject_unknown();
  static const std::set<std::string> forms = {"lognormal", "exponential", "empirical", "hermite"};
  if (!forms.count(ac.form)) throw ConfigError("unknown anamorphosis form '" + ac.form + "'");
  if (!forms.count(ac.base) || ac.base == "hermite")
    throw ConfigError("unknown hermite base form '" + ac.base + "'");

  Section kr(ini, "kriging");
  cfg.max_samples = kr.count("max_samples", 0);
  kr.reject_unknown();

  Section block(ini, "block");
  if (block.has("tile")) {
    const std::string t = lower(block.text("tile"));
    std::vector<std::size_t> parts;
    std::stringstream ss(t);
    std::string part;
    while (std::getline(ss, part, 'x')) parts.push_back(parse_index(trim(part), block.where("tile")));
    if (parts.size() < 2 || parts.size() > 3)
      throw ConfigError(block.where("tile") + ": expected NXxNY or NXxNYxNZ");
    cfg.block.tile_x = parts[0];
    cfg.block.tile_y = parts[1];
    cfg.block.tile_z = parts.size() == 3 ? parts[2] : 1;
  }
  if (block.has("nodes"))
    cfg.block.nodes = parse_node_list(block.text("nodes"), cfg.grid, block.where("nodes"));
  if (block.has("zgrid")) cfg.block.zgrid = ZGrid::parse(block.text("zgrid"));
  block.reject_unknown();

  Section mc(ini, "mc");
  cfg.mc.draws = mc.count("draws", cfg.mc.draws);
  cfg.mc.seed = mc.count("seed", cfg.mc.seed);
  mc.reject_unknown();

  Section sim(ini, "simulate");
  auto& sc = cfg.simulate;
  if (sim.has("mode")) sc.mode = lower(sim.text("mode"));
  sc.realizations = sim.count("realizations", sc.realizations);
  sc.seed = sim.count("seed", sc.seed);
  sc.sample_count = sim.count("sample_count", sc.sample_count);
  sc.node_cap = sim.count("node_cap", sc.node_cap);
  sc.allow_large = sim.flag("allow_large", sc.allow_large);
  sim.reject_unknown();
  if (sc.mode != "conditional" && sc.mode != "unconditional")
    throw ConfigError("simulate mode must be conditional or unconditional");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace mgvol
