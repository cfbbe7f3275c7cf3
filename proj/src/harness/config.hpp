#pragma once

#include "finsler/grid.hpp"
#include "finsler/measure.hpp"
#include "finsler/structure.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finsler::harness {

class ConfigError : public FinslerError {
 public:
  explicit ConfigError(const std::string& what) : FinslerError(ErrorCode::config, what) {}
};

/// Sectioned key=value text. '#' starts a comment; keys before the first
/// section header belong to section "".
class Config {
 public:
  static Config parse(std::string_view text, std::string source = "<text>");
  static Config load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const { return sections_.count(section) > 0; }
  std::string text(const std::string& section, const std::string& key) const;
  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
  double number(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  int integer(const std::string& section, const std::string& key, int fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              std::vector<double> fallback) const;
  Vec vector(const std::string& section, const std::string& key, int dimension) const;
  /// ';'-separated list of vectors.
  std::vector<Vec> vectors(const std::string& section, const std::string& key, int dimension) const;

  /// FNV-1a digest of the canonical key=value listing.
  std::string digest() const;
  const std::string& source() const { return source_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry& entry(const std::string& section, const std::string& key) const;
  std::string where(const std::string& section, const std::string& key) const;

  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 1469598103934665603ull);
std::string hex64(std::uint64_t value);

/// [structure] section: family, dimension, optional lower/upper bounds and
/// family parameters.
FinslerStructure build_structure(const Config& config);
VolumeKind volume_kind(const Config& config);
/// [grid] lower, upper, resolution (each >= 2).
Grid build_grid(const Config& config, int dimension, const std::string& section = "grid");

}  // namespace finsler::harness
