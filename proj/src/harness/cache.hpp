#pragma once

#include "finsler/distance.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace finsler::harness {

class CacheError : public FinslerError {
 public:
  explicit CacheError(const std::string& what) : FinslerError(ErrorCode::io, what) {}
};

struct CacheStats {
  std::string digest;
  std::size_t entries = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
};

/// Distance cache persisted as one append-only record file per structure
/// digest (<digest>.rec) with a companion index (<digest>.idx) of record
/// offsets. Doubles are stored as hex floats, so cached results are
/// bit-identical to fresh ones. A record or index that fails to parse or
/// checksum causes the files to be rebuilt from scratch with a warning.
class FileDistanceCache : public DistanceCache {
 public:
  /// `tag` separates entries computed with different solver settings.
  FileDistanceCache(std::string directory, std::string tag);
  ~FileDistanceCache() override;

  std::optional<DistanceResult> find(const std::string& structure_id, const Vec& p, const Vec& q) override;
  void store(const std::string& structure_id, const DistanceResult& result) override;

  /// Writes hit/miss counters; also done by the destructor.
  void flush();
  const std::vector<std::string>& warnings() const { return warnings_; }

  static std::vector<CacheStats> stats(const std::string& directory);
  static std::size_t clear(const std::string& directory);
  static std::string digest_of(const std::string& structure_id);

 private:
  struct Shard;
  Shard& shard(const std::string& structure_id);

  std::string dir_;
  std::string tag_;
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Shard>> shards_;
  std::vector<std::string> warnings_;
};

}  // namespace finsler::harness
