#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "mgvol/config.hpp"

namespace mgvol {

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;  // both mc.seed and simulate.seed
  std::optional<std::size_t> draws;
  bool allow_large = false;
  std::optional<std::string> zgrid;
  std::optional<std::string> nodes;
};

RunConfig apply_overrides(RunConfig cfg, const Overrides& o);

/// Agreement thresholds checked by cmd_validate.
struct ValidationThresholds {
  double min_sigma2 = 0.05;
  double variance_r = 0.98;
  double mean_r = 0.99;
  double max_relative_deviation = 0.05;
  double block_se_multiple = 4.0;
  double block_pass_fraction = 0.95;
  double max_ks = 0.05;
};

/// Each command writes CSVs under cfg.out, logs a summary, and returns the
/// process exit code. Library errors propagate as exceptions.
int cmd_transform(const RunConfig& cfg, std::ostream& log);
int cmd_krige(const RunConfig& cfg, std::ostream& log);
int cmd_moments(const RunConfig& cfg, std::ostream& log);
int cmd_volvar(const RunConfig& cfg, std::ostream& log);
int cmd_blockdist(const RunConfig& cfg, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_validate(const RunConfig& cfg, std::ostream& log,
                 const ValidationThresholds& thresholds = {});

/// Dispatches a verb; throws InputError for unknown verbs.
int run_command(const std::string& verb, const RunConfig& cfg, std::ostream& log);

}  // namespace mgvol
