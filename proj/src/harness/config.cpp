#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace finsler::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& token, double& out) {
  if (token == "inf" || token == "+inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (token == "-inf") {
    out = -std::numeric_limits<double>::infinity();
    return true;
  }
  std::size_t used = 0;
  try {
    out = std::stod(token, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == token.size();
}

}  // namespace

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

Config Config::parse(std::string_view text, std::string source) {
  Config c;
  c.source_ = std::move(source);
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(c.source_ + ":" + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      c.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(c.source_ + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(c.source_ + ":" + std::to_string(line_no) + ": empty key");
    auto& sec = c.sections_[section];
    if (sec.count(key))
      throw ConfigError(c.source_ + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    sec[key] = {trim(line.substr(eq + 1)), line_no};
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

std::string Config::where(const std::string& section, const std::string& key) const {
  const std::string field = "[" + section + "] " + key;
  if (!has(section, key)) return source_ + ": " + field;
  return source_ + ":" + std::to_string(sections_.at(section).at(key).line) + ": " + field;
}

const Config::Entry& Config::entry(const std::string& section, const std::string& key) const {
  if (!has(section, key)) throw ConfigError(source_ + ": missing required field [" + section + "] " + key);
  return sections_.at(section).at(key);
}

std::string Config::text(const std::string& section, const std::string& key) const {
  return entry(section, key).value;
}

std::string Config::text(const std::string& section, const std::string& key, const std::string& fallback) const {
  return has(section, key) ? text(section, key) : fallback;
}

double Config::number(const std::string& section, const std::string& key) const {
  double v;
  if (!parse_double(text(section, key), v)) throw ConfigError(where(section, key) + ": expected a number");
  return v;
}

double Config::number(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

int Config::integer(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  const double v = number(section, key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(where(section, key) + ": expected an integer");
  return static_cast<int>(v);
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key) const {
  std::istringstream in(text(section, key));
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    if (!token.empty() && token.back() == ',') token.pop_back();
    if (token.empty()) continue;
    double v;
    if (!parse_double(token, v)) throw ConfigError(where(section, key) + ": '" + token + "' is not a number");
    out.push_back(v);
  }
  return out;
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key,
                                    std::vector<double> fallback) const {
  return has(section, key) ? numbers(section, key) : fallback;
}

Vec Config::vector(const std::string& section, const std::string& key, int dimension) const {
  const auto v = numbers(section, key);
  if (static_cast<int>(v.size()) != dimension)
    throw ConfigError(where(section, key) + ": expected " + std::to_string(dimension) + " components");
  Vec out(dimension);
  for (int i = 0; i < dimension; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

std::vector<Vec> Config::vectors(const std::string& section, const std::string& key, int dimension) const {
  std::vector<Vec> out;
  std::istringstream in(text(section, key));
  std::string part;
  while (std::getline(in, part, ';')) {
    if (trim(part).empty()) continue;
    const Config one = parse("v = " + part, source_);
    const auto v = one.numbers("", "v");
    if (static_cast<int>(v.size()) != dimension)
      throw ConfigError(where(section, key) + ": each entry needs " + std::to_string(dimension) + " components");
    Vec x(dimension);
    for (int i = 0; i < dimension; ++i) x[i] = v[static_cast<std::size_t>(i)];
    out.push_back(x);
  }
  return out;
}

std::string Config::digest() const {
  std::string canon;
  for (const auto& [name, sec] : sections_)
    for (const auto& [key, e] : sec) canon += "[" + name + "]" + key + "=" + e.value + "\n";
  return hex64(fnv1a(canon));
}

FinslerStructure build_structure(const Config& c) {
  const std::string s = "structure";
  const std::string family_name = c.text(s, "family");
  Family family;
  try {
    family = family_from_string(family_name);
  } catch (const FinslerError&) {
    throw ConfigError(c.source() + ": [structure] family: unknown family '" + family_name + "'");
  }
  if (!c.has(s, "dimension")) throw ConfigError(c.source() + ": missing required field [structure] dimension");
  const int n = c.integer(s, "dimension", 0);
  if (n < 1 || n > kMaxDim)
    throw ConfigError(c.source() + ": [structure] dimension must be between 1 and " + std::to_string(kMaxDim));
  const std::string id = c.text(s, "id", "");

  auto chart = [&] {
    Vec lower = Vec::Constant(n, -std::numeric_limits<double>::infinity());
    Vec upper = Vec::Constant(n, std::numeric_limits<double>::infinity());
    if (c.has(s, "lower")) lower = c.vector(s, "lower", n);
    if (c.has(s, "upper")) upper = c.vector(s, "upper", n);
    return ManifoldChart(lower, upper);
  };
  const bool bounded = c.has(s, "lower") || c.has(s, "upper");

  try {
    switch (family) {
      case Family::euclidean:
        if (!bounded && id.empty()) return FinslerStructure::euclidean(n);
        return FinslerStructure::riemannian(chart(), make_matrix_preset("identity", n, {}),
                                            id.empty() ? "euclidean" : id);
      case Family::riemannian: {
        const std::string preset = c.text(s, "metric");
        if (preset == "hyperbolic" && !bounded && id.empty()) return FinslerStructure::hyperbolic(n);
        ManifoldChart ch = chart();
        if (preset == "hyperbolic" && !bounded) {
          Vec lower = ch.lower();
          lower[n - 1] = 0.0;
          ch = ManifoldChart(lower, ch.upper());
        }
        return FinslerStructure::riemannian(ch, make_matrix_preset(preset, n, c.numbers(s, "metric_params", {})), id);
      }
      case Family::minkowski: {
        Mat a = Mat::Identity(n, n);
        if (c.has(s, "metric_params")) a = make_matrix_preset("constant", n, c.numbers(s, "metric_params"))->value(Vec::Zero(n));
        const Vec b = c.has(s, "beta") ? c.vector(s, "beta", n) : Vec(Vec::Zero(n));
        return FinslerStructure::minkowski(a, b);
      }
      case Family::randers: {
        const std::string metric = c.text(s, "metric", "identity");
        const std::string beta = c.text(s, "beta_preset", "constant");
        if (metric == "identity" && beta == "constant" && !bounded && id.empty())
          return FinslerStructure::randers_constant(c.vector(s, "beta", n));
        const std::vector<double> beta_params =
            beta == "constant" ? c.numbers(s, "beta") : c.numbers(s, "beta_params", {});
        return FinslerStructure::randers(chart(), make_matrix_preset(metric, n, c.numbers(s, "metric_params", {})),
                                         make_one_form_preset(beta, n, beta_params), id);
      }
      case Family::custom:
        return FinslerStructure::custom_preset(c.text(s, "preset"), n, c.numbers(s, "params", {}));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const FinslerError& e) {
    throw ConfigError(c.source() + ": [structure]: " + e.what());
  }
  throw ConfigError(c.source() + ": [structure] family: unsupported");
}

VolumeKind volume_kind(const Config& c) {
  const std::string kind = c.text("volume", "kind", "busemann-hausdorff");
  try {
    return volume_kind_from_string(kind);
  } catch (const FinslerError&) {
    throw ConfigError(c.source() + ": [volume] kind: unknown volume form '" + kind + "'");
  }
}

Grid build_grid(const Config& c, int n, const std::string& section) {
  Grid g;
  g.box.lower = c.vector(section, "lower", n);
  g.box.upper = c.vector(section, "upper", n);
  const auto res = c.numbers(section, "resolution");
  if (static_cast<int>(res.size()) != n)
    throw ConfigError(c.source() + ": [" + section + "] resolution: expected " + std::to_string(n) + " entries");
  for (double r : res) {
    if (r < 2 || r != std::floor(r))
      throw ConfigError(c.source() + ": [" + section + "] resolution: entries must be integers >= 2");
    g.resolution.push_back(static_cast<int>(r));
  }
  for (int i = 0; i < n; ++i)
    if (!(g.box.lower[i] < g.box.upper[i]))
      throw ConfigError(c.source() + ": [" + section + "] lower must be below upper");
  return g;
}

}  // namespace finsler::harness
