#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgvol/geometry.hpp"

namespace mgvol {

/// Raw INI contents: section -> key -> value.
using IniData = std::map<std::string, std::map<std::string, std::string>>;

/// Parses `[section]` headers and `key = value` lines. `#` starts a comment
/// anywhere, `;` only at the start of a line. Throws ConfigError on malformed lines or repeated keys.
IniData parse_ini(const std::string& text);

struct ZGrid {
  double min = 0.0;
  double max = 0.0;
  std::size_t steps = 0;

  /// "min:max:steps"
  static ZGrid parse(const std::string& text);
  std::vector<double> points() const;
};

struct AnamorphosisConfig {
  std::string form = "empirical";  // lognormal | exponential | empirical | hermite
  double mu = 0.0;
  double sigma = 1.0;
  double lambda = 1.0;
  std::optional<double> z_min;
  std::optional<double> z_max;
  int degree = 100;                // hermite_degree
  std::string base = "empirical";  // form the hermite series is fitted to
};

struct BlockConfig {
  std::size_t tile_x = 0, tile_y = 0, tile_z = 1;
  /// Node list for blockdist: node indices or grid cells "ix,iy[,iz]".
  std::vector<std::size_t> nodes;
  std::optional<ZGrid> zgrid;
};

struct McConfig {
  std::size_t draws = 100000;
  std::uint64_t seed = 0;
};

struct SimulateConfig {
  std::string mode = "conditional";  // conditional | unconditional
  std::size_t realizations = 2000;
  std::uint64_t seed = 0;
  std::size_t sample_count = 100;  // validate without a samples file
  std::size_t node_cap = 4096;
  bool allow_large = false;
};

struct RunConfig {
  std::string samples;  // empty: none
  std::string out = "out";
  Grid grid;
  std::string covariance;
  AnamorphosisConfig anamorphosis;
  std::size_t max_samples = 0;
  BlockConfig block;
  McConfig mc;
  SimulateConfig simulate;
};

/// Builds a RunConfig; relative paths are resolved against base_dir.
/// Unknown sections or keys are rejected.
/// Node indices or grid cells "ix,iy[,iz]" separated by spaces or ';'.
std::vector<std::size_t> parse_node_list(const std::string& text, const Grid& grid,
                                         const std::string& where = "node list");

RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace mgvol
