#include <doctest.h>

#include "config.hpp"
#include "context.hpp"
#include "output.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace finsler;
using namespace finsler::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("finsler_harness_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& command, const std::string& config, const fs::path& out, std::string* log_text = nullptr,
        const std::string& argument = "", const std::string& cache_dir = "") {
  CommandOptions o;
  o.command = command;
  o.config_path = config;
  o.out_dir = out.string();
  o.argument = argument;
  o.cache_dir = cache_dir;
  std::ostringstream log;
  const int code = run_command(o, log);
  if (log_text) *log_text = log.str();
  return code;
}

const char* kEuclidean = R"([structure]
family = euclidean
dimension = 2
[grid]
lower = -1 -1
upper = 1 1
resolution = 5 5
[ray]
origin = 0 0
direction = 1 0
)";

}  // namespace

TEST_CASE("config parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(Config::parse("[a]\nx = 1\nx = 2\n", "f.cfg"), doctest::Contains("f.cfg:3: duplicate key 'x'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse("[a\n", "f.cfg"), doctest::Contains("f.cfg:1:"), ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse("[a]\nnot a pair\n", "f.cfg"), doctest::Contains("f.cfg:2:"), ConfigError);
  const Config c = Config::parse("[a]\nv = 1 2 x\n", "f.cfg");
  CHECK_THROWS_AS(c.numbers("a", "v"), ConfigError);
  CHECK(Config::parse("# c\n[a]\nk = 3 # tail\n").number("a", "k") == 3.0);
}

TEST_CASE("config digest ignores ordering and comments") {
  const Config a = Config::parse("[s]\nx = 1\ny = 2\n");
  const Config b = Config::parse("# note\n[s]\ny = 2\nx = 1\n");
  CHECK(a.digest() == b.digest());
  CHECK(a.digest() != Config::parse("[s]\nx = 1\ny = 3\n").digest());
}

TEST_CASE("missing dimension exits with a config error naming the field") {
  const auto dir = scratch("missing");
  const auto cfg = write_config(dir, "[structure]\nfamily = euclidean\n");
  std::string log;
  CHECK(run("eval", cfg, dir, &log) == kExitConfig);
  CHECK(log.find("[structure] dimension") != std::string::npos);
  CHECK(slurp(dir / "run_record.txt").find("exit_code=2") != std::string::npos);
}

TEST_CASE("randers screening rejects |beta| >= 1") {
  const auto dir = scratch("screen");
  const auto cfg = write_config(dir, "[structure]\nfamily = randers\ndimension = 2\nbeta = 1.2 0\n");
  CHECK(run("eval", cfg, dir) == kExitConfig);
}

TEST_CASE("eval writes one row per grid point") {
  const auto dir = scratch("eval");
  CHECK(run("eval", write_config(dir, kEuclidean), dir) == kExitOk);
  std::ifstream in(dir / "eval.tsv");
  std::string header, line;
  std::getline(in, header);
  CHECK(header.rfind("x1\tx2\tF\tg_eig1\tg_eig2", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    double x1, x2, F, e1, e2;
    ss >> x1 >> x2 >> F >> e1 >> e2;
    CHECK(F == doctest::Approx(1.0));
    CHECK(e1 == doctest::Approx(1.0));
    CHECK(e2 == doctest::Approx(1.0));
    ++rows;
  }
  CHECK(rows == 25);
}

TEST_CASE("busemann with a short ray budget exits 3 and still writes the field") {
  const auto dir = scratch("budget");
  const auto cfg = write_config(dir, std::string(kEuclidean) + "[run]\nt_max = 2\n");
  CHECK(run("busemann", cfg, dir) == kExitNotConverged);
  CHECK(fs::exists(dir / "busemann_field.tsv"));
  CHECK(slurp(dir / "busemann_report.txt").find("check=busemann.convergence verdict=fail") != std::string::npos);
}

TEST_CASE("an unwritable cache directory exits 4") {
  const auto dir = scratch("cache_bad");
  std::ofstream(dir / "blocker") << "x";
  CHECK(run("eval", write_config(dir, kEuclidean), dir, nullptr, "", (dir / "blocker" / "cache").string()) ==
        kExitCache);
}

TEST_CASE("cache hits reproduce distances bit for bit and corruption is recovered") {
  const auto dir = scratch("cache");
  const auto cache = (dir / "cache").string();
  const auto cfg = write_config(dir, R"([structure]
family = riemannian
dimension = 2
metric = hyperbolic
[distance]
from = 0 1 ; 0.5 1.2
to = 1 2 ; -0.3 0.7
)");
  const auto out1 = dir / "a", out2 = dir / "b", out3 = dir / "c";
  fs::create_directories(out1);
  fs::create_directories(out2);
  fs::create_directories(out3);
  REQUIRE(run("distance", cfg, out1, nullptr, "", cache) == kExitOk);
  REQUIRE(run("distance", cfg, out2, nullptr, "", cache) == kExitOk);
  CHECK(slurp(out1 / "distance.tsv") == slurp(out2 / "distance.tsv"));
  const auto stats = FileDistanceCache::stats(cache);
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].hits == 4);

  for (const auto& e : fs::directory_iterator(cache))
    if (e.path().extension() == ".rec") std::ofstream(e.path(), std::ios::trunc) << "garbage\n";
  std::string log;
  CHECK(run("distance", cfg, out3, &log, "", cache) == kExitOk);
  CHECK(log.find("corrupt") != std::string::npos);
  CHECK(slurp(out1 / "distance.tsv") == slurp(out3 / "distance.tsv"));
}

TEST_CASE("verify metric output is deterministic") {
  const auto dir = scratch("det");
  const auto cfg = write_config(dir, kEuclidean);
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  CHECK(run("verify", cfg, dir / "a", nullptr, "metric") == kExitOk);
  CHECK(run("verify", cfg, dir / "b", nullptr, "metric") == kExitOk);
  const auto a = slurp(dir / "a" / "verify.txt");
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(dir / "b" / "verify.txt"));
  CHECK(a.find("verdict=fail") == std::string::npos);
}

TEST_CASE("number formatting and record quoting") {
  CHECK(fmt(-0.0) == "0");
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(1.0 / 3.0) == "0.333333333333");
  CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(record({{"a", "x y"}, {"b", "1"}}) == "a=\"x y\" b=1");
  const Check c = upper_check("speed", "drift stays small", 2e-9, 1e-8, "");
  CHECK(c.pass);
  CHECK(check_record(c).rfind("check=speed verdict=pass observed=2e-09 bound=1e-08", 0) == 0);
}
