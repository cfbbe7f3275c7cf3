#include "cache.hpp"

#include "config.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

namespace fs = std::filesystem;

namespace finsler::harness {

namespace {

std::string hexfloat(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

bool read_double(std::istream& in, double& v) {
  std::string tok;
  if (!(in >> tok)) return false;
  char* end = nullptr;
  v = std::strtod(tok.c_str(), &end);
  return end && *end == '\0';
}

void write_vec(std::ostream& out, const Vec& v) {
  out << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << hexfloat(v[i]);
}

bool read_vec(std::istream& in, Vec& v) {
  long n;
  if (!(in >> n) || n < 0 || n > kMaxDim) return false;
  v.resize(n);
  for (long i = 0; i < n; ++i)
    if (!read_double(in, v[i])) return false;
  return true;
}

std::string key_of(const std::string& tag, const Vec& p, const Vec& q) {
  std::ostringstream k;
  k << tag;
  write_vec(k, p);
  write_vec(k, q);
  return hex64(fnv1a(k.str()));
}

std::string encode(const std::string& key, const DistanceResult& r) {
  std::ostringstream body;
  body << key;
  write_vec(body, r.from);
  write_vec(body, r.to);
  body << ' ' << hexfloat(r.value) << ' ' << hexfloat(r.error_estimate) << ' ' << static_cast<int>(r.method) << ' '
       << r.iterations << ' ' << hexfloat(r.miss);
  write_vec(body, r.initial_velocity);
  write_vec(body, r.final_velocity);
  body << ' ' << r.path.size();
  for (const Vec& x : r.path) write_vec(body, x);
  const std::string b = body.str();
  return b + ' ' + hex64(fnv1a(b)) + '\n';
}

bool decode(const std::string& line, std::string& key, DistanceResult& r) {
  const auto sp = line.rfind(' ');
  if (sp == std::string::npos) return false;
  const std::string b = line.substr(0, sp);
  if (line.substr(sp + 1) != hex64(fnv1a(b))) return false;
  std::istringstream in(b);
  int method;
  std::size_t np;
  if (!(in >> key) || !read_vec(in, r.from) || !read_vec(in, r.to) || !read_double(in, r.value) ||
      !read_double(in, r.error_estimate) || !(in >> method >> r.iterations) || !read_double(in, r.miss) ||
      !read_vec(in, r.initial_velocity) || !read_vec(in, r.final_velocity) || !(in >> np) || np > 100000)
    return false;
  if (method < 0 || method > 2) return false;
  r.method = static_cast<DistanceMethod>(method);
  r.path.resize(np);
  for (auto& x : r.path)
    if (!read_vec(in, x)) return false;
  std::string rest;
  return !(in >> rest);
}

}  // namespace

struct FileDistanceCache::Shard {
  std::string digest;
  std::map<std::string, DistanceResult> entries;
  std::ofstream records;
  std::ofstream index;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t prior_hits = 0;
  std::uint64_t prior_misses = 0;
};

std::string FileDistanceCache::digest_of(const std::string& structure_id) { return hex64(fnv1a(structure_id)); }

FileDistanceCache::FileDistanceCache(std::string directory, std::string tag)
    : dir_(std::move(directory)), tag_(std::move(tag)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  const fs::path probe = fs::path(dir_) / ".probe";
  std::ofstream test(probe);
  if (ec || !test) throw CacheError("cache directory '" + dir_ + "' is not writable");
  test.close();
  fs::remove(probe, ec);
}

FileDistanceCache::~FileDistanceCache() {
  try {
    flush();
  } catch (...) {
  }
}

FileDistanceCache::Shard& FileDistanceCache::shard(const std::string& structure_id) {
  const std::string digest = digest_of(structure_id);
  auto& slot = shards_[digest];
  if (slot) return *slot;
  slot = std::make_unique<Shard>();
  Shard& s = *slot;
  s.digest = digest;
  const fs::path rec = fs::path(dir_) / (digest + ".rec");
  const fs::path idx = fs::path(dir_) / (digest + ".idx");
  const fs::path st = fs::path(dir_) / (digest + ".stats");

  bool corrupt = false;
  if (fs::exists(idx) || fs::exists(rec)) {
    std::ifstream in_idx(idx), in_rec(rec, std::ios::binary);
    if (!in_idx || !in_rec) corrupt = true;
    std::string key;
    std::streamoff offset;
    while (!corrupt && in_idx >> key >> offset) {
      in_rec.clear();
      in_rec.seekg(offset);
      std::string line, rkey;
      DistanceResult r;
      if (!std::getline(in_rec, line) || !decode(line, rkey, r) || rkey != key) {
        corrupt = true;
        break;
      }
      s.entries[key] = std::move(r);
    }
    if (!corrupt && !in_idx.eof()) corrupt = true;
  }
  if (corrupt) {
    const std::string w = "cache shard " + digest + " is corrupt; rebuilding from scratch";
    warnings_.push_back(w);
    s.entries.clear();
    std::error_code ec;
    fs::remove(rec, ec);
    fs::remove(idx, ec);
    fs::remove(st, ec);
  } else if (std::ifstream in_st(st); in_st) {
    in_st >> s.prior_hits >> s.prior_misses;
  }
  s.records.open(rec, std::ios::binary | std::ios::app);
  s.index.open(idx, std::ios::app);
  if (!s.records || !s.index) throw CacheError("cannot open cache files in '" + dir_ + "'");
  return s;
}

std::optional<DistanceResult> FileDistanceCache::find(const std::string& structure_id, const Vec& p, const Vec& q) {
  std::lock_guard<std::mutex> lock(mutex_);
  Shard& s = shard(structure_id);
  const auto it = s.entries.find(key_of(tag_, p, q));
  if (it == s.entries.end() || it->second.from != p || it->second.to != q) {
    ++s.misses;
    return std::nullopt;
  }
  ++s.hits;
  return it->second;
}

void FileDistanceCache::store(const std::string& structure_id, const DistanceResult& result) {
  std::lock_guard<std::mutex> lock(mutex_);
  Shard& s = shard(structure_id);
  const std::string key = key_of(tag_, result.from, result.to);
  if (s.entries.count(key)) return;
  s.records.seekp(0, std::ios::end);
  const std::streamoff offset = s.records.tellp();
  s.records << encode(key, result);
  s.records.flush();
  s.index << key << ' ' << offset << '\n';
  s.index.flush();
  if (!s.records || !s.index) throw CacheError("write to cache directory '" + dir_ + "' failed");
  s.entries[key] = result;
}

void FileDistanceCache::flush() {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto& [digest, s] : shards_) {
    std::ofstream out(fs::path(dir_) / (digest + ".stats"), std::ios::trunc);
    out << s->prior_hits + s->hits << ' ' << s->prior_misses + s->misses << '\n';
  }
}

std::vector<CacheStats> FileDistanceCache::stats(const std::string& directory) {
  std::vector<CacheStats> out;
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) return out;
  std::vector<fs::path> idx_files;
  for (const auto& e : fs::directory_iterator(directory))
    if (e.path().extension() == ".idx") idx_files.push_back(e.path());
  std::sort(idx_files.begin(), idx_files.end());
  for (const auto& p : idx_files) {
    CacheStats s;
    s.digest = p.stem().string();
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++s.entries;
    std::ifstream st(fs::path(p).replace_extension(".stats"));
    if (st) st >> s.hits >> s.misses;
    out.push_back(s);
  }
  return out;
}

std::size_t FileDistanceCache::clear(const std::string& directory) {
  std::size_t removed = 0;
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) return 0;
  std::vector<fs::path> victims;
  for (const auto& e : fs::directory_iterator(directory)) {
    const auto ext = e.path().extension();
    if (ext == ".rec" || ext == ".idx" || ext == ".stats") victims.push_back(e.path());
  }
  for (const auto& p : victims) removed += fs::remove(p, ec);
  return removed;
}

}  // namespace finsler::harness
