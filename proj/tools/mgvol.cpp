#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "mgvol/commands.hpp"
#include "mgvol/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Conditional point and block-support distributions under a multi-Gaussian model"};
  app.require_subcommand(1, 1);

  std::string config;
  mgvol::Overrides overrides;
  std::string out, zgrid, nodes;
  std::uint64_t seed = 0;
  std::size_t draws = 0;

  const char* verbs[][2] = {
      {"transform", "Normal-score transform of the samples"},
      {"krige", "Simple kriging mean and variance maps"},
      {"moments", "Conditional mean and variance maps of the raw variable"},
      {"volvar", "Conditional variance of block averages"},
      {"blockdist", "Density and cdf of one block average"},
      {"simulate", "LU simulation to a realization file"},
      {"validate", "Analytic results against conditional simulation"},
  };
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", seed, "Seed for Monte-Carlo draws and simulation");
    sub->add_option("--draws", draws, "Monte-Carlo draws")->check(CLI::PositiveNumber);
    sub->add_flag("--allow-large", overrides.allow_large, "Lift the simulation node cap");
    sub->add_option("--zgrid", zgrid, "Block z grid min:max:steps");
    sub->add_option("--nodes", nodes, "Block nodes: indices or ix,iy cells");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--out")) overrides.out = out;
  if (sub->count("--seed")) overrides.seed = seed;
  if (sub->count("--draws")) overrides.draws = draws;
  if (sub->count("--zgrid")) overrides.zgrid = zgrid;
  if (sub->count("--nodes")) overrides.nodes = nodes;

  try {
    const auto cfg = mgvol::apply_overrides(mgvol::load_config(config), overrides);
    return mgvol::run_command(sub->get_name(), cfg, std::cout);
  } catch (const mgvol::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const mgvol::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
