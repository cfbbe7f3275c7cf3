#include "context.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>

namespace finsler::harness {

namespace {

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string solver_tag(const DistanceOptions& o) {
  return "step=" + fmt(o.step) + ";miss=" + fmt(o.miss_tolerance) + ";accept=" + fmt(o.accept_miss) +
         ";iterations=" + std::to_string(o.max_iterations) + ";lattice=" + (o.use_lattice ? "1" : "0");
}

std::string resolve_cache_dir(const CommandOptions& options, const Config& config) {
  if (!options.cache_dir.empty()) return options.cache_dir;
  if (const char* env = std::getenv("FINSLER_CACHE_DIR"); env && *env) return env;
  return config.text("cache", "dir", "");
}

int cmd_cache(const CommandOptions& options, const Config& config, Context& record, std::ostream& log) {
  const std::string dir = resolve_cache_dir(options, config);
  if (dir.empty()) throw ConfigError(config.source() + ": no cache directory configured ([cache] dir)");
  const std::string action = options.argument.empty() ? config.text("cache", "action", "stats") : options.argument;
  if (action == "clear") {
    // probe first so an unwritable directory reports exit 4
    FileDistanceCache probe(dir, "probe");
    const std::size_t removed = FileDistanceCache::clear(dir);
    log << "cache: removed " << removed << " files from " << dir << "\n";
    record.summary.emplace_back("removed", std::to_string(removed));
    return kExitOk;
  }
  if (action != "stats") throw ConfigError("unknown cache action '" + action + "' (stats, clear)");
  FileDistanceCache probe(dir, "probe");
  Table table({"digest", "entries", "hits", "misses", "hit_rate"});
  for (const auto& s : FileDistanceCache::stats(dir)) {
    const double total = static_cast<double>(s.hits + s.misses);
    table.row()
        .add_text(s.digest)
        .add_text(std::to_string(s.entries))
        .add_text(std::to_string(s.hits))
        .add_text(std::to_string(s.misses))
        .add(total > 0 ? static_cast<double>(s.hits) / total : 0.0);
    std::cout << s.digest << " entries=" << s.entries << " hits=" << s.hits << " misses=" << s.misses << "\n";
  }
  table.write(record.output("cache.tsv"));
  return kExitOk;
}

}  // namespace

int run_command(const CommandOptions& options, std::ostream& log) {
  using Command = int (*)(Context&);
  static const std::map<std::string, Command> commands = {
      {"eval", cmd_eval},           {"geodesic", cmd_geodesic},   {"distance", cmd_distance},
      {"busemann", cmd_busemann},   {"horosphere", cmd_horosphere}, {"laplacian", cmd_laplacian},
      {"harmonic", cmd_harmonic},   {"ahf", cmd_ahf},             {"verify", cmd_verify},
  };
  const std::string started = timestamp();
  std::optional<Context> ctx;
  int code = kExitOk;
  std::string error;

  try {
    if (options.command != "cache" && !commands.count(options.command))
      throw ConfigError("unknown command '" + options.command + "'");
    Config config = Config::load(options.config_path);
    std::filesystem::create_directories(options.out_dir.empty() ? "." : options.out_dir);

    if (options.command == "cache") {
      // the cache command does not need a valid structure
      ctx.emplace(config, FinslerStructure::euclidean(1));
      ctx->out_dir = options.out_dir.empty() ? "." : options.out_dir;
      ctx->log = &log;
      code = cmd_cache(options, config, *ctx, log);
    } else {
      FinslerStructure F = build_structure(config);
      const ScreeningReport screen = screen_structure(F, 50, options.seed);
      if (!screen.passed) throw ConfigError(config.source() + ": structure fails screening: " + screen.message);
      ctx.emplace(std::move(config), std::move(F));
      Context& c = *ctx;
      c.volume = volume_kind(c.config);
      c.out_dir = options.out_dir.empty() ? "." : options.out_dir;
      c.argument = options.argument;
      c.seed = options.seed;
      c.log = &log;
      c.tol = options.tol > 0 ? options.tol : c.config.number("run", "tol", 1e-4);
      c.threads = options.threads > 0 ? options.threads : c.config.integer("run", "threads", 1);
      c.busemann.t_max = c.config.number("run", "t_max", kBusemannTMax);
      if (!(c.tol > 0.0) || c.threads < 1 || !(c.busemann.t_max > 0.0))
        throw ConfigError(c.config.source() + ": [run] tol, threads and t_max must be positive");
      c.cache_dir = resolve_cache_dir(options, c.config);
      if (!c.cache_dir.empty()) {
        c.cache = std::make_unique<FileDistanceCache>(c.cache_dir, solver_tag(c.distance));
        c.distance.cache = c.cache.get();
      }
      c.busemann.distance = c.distance;
      code = commands.at(options.command)(c);
      if (c.cache) c.cache->flush();
    }
  } catch (const ConfigError& e) {
    error = e.what();
    code = kExitConfig;
  } catch (const CacheError& e) {
    error = e.what();
    code = kExitCache;
  } catch (const FinslerError& e) {
    error = e.what();
    code = e.code() == ErrorCode::not_converged ? kExitNotConverged : kExitError;
  } catch (const std::exception& e) {
    error = e.what();
    code = kExitError;
  }
  if (!error.empty()) log << options.command << ": " << error << "\n";
  if (ctx && ctx->cache)
    for (const auto& w : ctx->cache->warnings()) log << "cache: warning: " << w << "\n";

  // The run record is the only output carrying timestamps.
  try {
    const std::string dir = options.out_dir.empty() ? "." : options.out_dir;
    std::vector<std::string> lines;
    lines.push_back(record({{"command", options.command}, {"config", options.config_path}}));
    if (ctx) lines.push_back(record({{"config_digest", ctx->config.digest()}, {"structure", ctx->F.id()}}));
    lines.push_back(record({{"started", started}, {"finished", timestamp()}, {"exit_code", std::to_string(code)}}));
    if (!error.empty()) lines.push_back(record({{"error", error}}));
    if (ctx) {
      for (const auto& o : ctx->outputs) lines.push_back(record({{"output", o}}));
      for (const auto& c : ctx->checks) lines.push_back(check_record(c));
    }
    if (std::filesystem::is_directory(dir))
      write_lines((std::filesystem::path(dir) / "run_record.txt").string(), lines);
  } catch (const std::exception& e) {
    log << "run record: " << e.what() << "\n";
    if (code == kExitOk) code = kExitError;
  }
  return code;
}

}  // namespace finsler::harness
