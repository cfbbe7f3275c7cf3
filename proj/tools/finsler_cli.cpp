#include "finsler/finsler.h"

#include <CLI11.hpp>

#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Busemann functions and Laplacians on Finsler model spaces"};
  std::string command, argument, config, out = ".", cache_dir;
  double tol = 0.0;
  int threads = 0;
  unsigned long long seed = 42;

  app.add_option("command", command, "eval, geodesic, distance, busemann, horosphere, laplacian, harmonic, ahf, verify, cache")
      ->required()
      ->check(CLI::IsMember({"eval", "geodesic", "distance", "busemann", "horosphere", "laplacian", "harmonic", "ahf",
                             "verify", "cache"}));
  app.add_option("argument", argument, "verify suite (metric, geodesic, laplacian, busemann, ahf, all) or cache action (stats, clear)");
  app.add_option("--suite", argument, "verify suite");
  app.add_option("--config", config, "scenario config")->required();
  app.add_option("--out", out, "output directory");
  app.add_option("--tol", tol, "tolerance override")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for sampled checks");
  app.add_option("--cache-dir", cache_dir, "distance cache directory (overrides FINSLER_CACHE_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  fsl_command_options options{};
  options.command = command.c_str();
  options.config_path = config.c_str();
  options.out_dir = out.c_str();
  options.argument = argument.empty() ? nullptr : argument.c_str();
  options.tol = tol;
  options.threads = threads;
  options.seed = seed;
  options.cache_dir = cache_dir.empty() ? nullptr : cache_dir.c_str();
  return fsl_command_run(&options);
}
