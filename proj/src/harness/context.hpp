#pragma once

#include "cache.hpp"
#include "config.hpp"
#include "output.hpp"

#include "finsler/busemann.hpp"

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace finsler::harness {

struct CommandOptions {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::string argument;  // verify suite or cache action
  double tol = 0.0;      // <= 0 keeps the config value
  int threads = 0;       // <= 0 keeps the config value
  std::uint64_t seed = 42;
  std::string cache_dir;  // empty: FINSLER_CACHE_DIR, then [cache] dir
};

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitNotConverged = 3, kExitCache = 4, kExitError = 5 };

/// Runs one command and writes its outputs plus run_record.txt into out_dir.
/// Diagnostics go to `log`.
int run_command(const CommandOptions& options, std::ostream& log);

/// State shared by the command implementations.
struct Context {
  Context(Config c, FinslerStructure s) : config(std::move(c)), F(std::move(s)) {}

  Config config;
  FinslerStructure F;
  VolumeKind volume = VolumeKind::busemann_hausdorff;
  std::string out_dir;
  std::string argument;
  double tol = 1e-4;
  int threads = 1;
  std::uint64_t seed = 42;
  std::string cache_dir;
  std::unique_ptr<FileDistanceCache> cache;
  DistanceOptions distance;
  BusemannOptions busemann;
  std::ostream* log = nullptr;

  std::vector<std::string> outputs;
  std::vector<Check> checks;
  /// Extra key=value lines for the report of the command.
  std::vector<std::pair<std::string, std::string>> summary;

  int dimension() const { return F.dimension(); }
  /// Full path of an output file; records it in `outputs`.
  std::string output(const std::string& name);
  /// Writes <name> with the summary and sorted check rows.
  void write_report(const std::string& name, const std::string& kind);
  bool all_passed() const;
};

Ray build_ray(const Context& ctx, const std::string& section = "ray");
/// Catalogue field named by `key` in `section`: half-square, coordinate,
/// linear, radius, negative-log-height, distance-from, busemann.
ScalarField build_field(const Context& ctx, const std::string& section, const std::string& key = "field");
/// Grid points, or the explicit `points` list of `section` when present.
std::vector<Vec> sample_points(const Context& ctx, const std::string& section);

/// Field export (optional) and the truncation, Lipschitz, unit-gradient and
/// closed-form checks on a grid. Returns false when some bracket stayed open.
bool busemann_field_checks(Context& ctx, const Ray& eta, const Grid& grid, bool write_field, int lipschitz_pairs);
/// [ahf] directions (with origins, or the [ray] origin), else the [ray] ray.
std::vector<Ray> ahf_rays(const Context& ctx);
AhfOptions ahf_options(const Context& ctx);

int cmd_eval(Context& ctx);
int cmd_geodesic(Context& ctx);
int cmd_distance(Context& ctx);
int cmd_busemann(Context& ctx);
int cmd_horosphere(Context& ctx);
int cmd_laplacian(Context& ctx);
int cmd_harmonic(Context& ctx);
int cmd_ahf(Context& ctx);
int cmd_verify(Context& ctx);

}  // namespace finsler::harness
