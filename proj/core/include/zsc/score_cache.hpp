#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "zsc/scoring.hpp"

namespace zsc {

// Persistent score cache: an append-only JSONL file plus an in-memory index
// rebuilt at startup. Concurrent readers, serialized appends (flock across
// processes). Corrupt lines are skipped with a warning; the last record for a
// key wins.
class ScoreCache {
 public:
  struct Stats {
    std::size_t records = 0;
    std::size_t loaded_lines = 0;
    std::size_t corrupt_lines = 0;
    std::size_t hits = 0;
    std::size_t misses = 0;
    std::size_t appended = 0;
  };

  // In-memory only.
  ScoreCache() = default;
  explicit ScoreCache(std::filesystem::path path);
  ~ScoreCache();

  ScoreCache(const ScoreCache&) = delete;
  ScoreCache& operator=(const ScoreCache&) = delete;

  // Digest of (backend, model, prefix or null marker, continuation,
  // attribution rule version).
  static std::string make_key(std::string_view backend_id,
                              const ScoreQuery& query);

  // nullopt is a miss.
  std::optional<ScoreRecord> get(const std::string& key) const;
  void put(const std::string& key, std::string_view backend_id,
           const ScoreRecord& record);

  Stats stats() const;
  const std::optional<std::filesystem::path>& path() const { return path_; }

  // Rewrites the file with one line per key. Run with no other writers.
  void compact();

 private:
  void load();
  void append_line(const std::string& line);

  std::optional<std::filesystem::path> path_;
  int fd_ = -1;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::pair<std::string, ScoreRecord>> index_;
  Stats stats_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

struct CacheVerifyReport {
  std::size_t lines = 0;
  std::size_t valid = 0;
  std::size_t corrupt = 0;       // unparseable or failing record validation
  std::size_t key_mismatch = 0;  // key does not match the record's fields
  std::size_t duplicates = 0;
  std::size_t unique_keys = 0;

  bool ok() const { return corrupt == 0 && key_mismatch == 0; }
};

CacheVerifyReport verify_cache_file(const std::filesystem::path& path);

// Serves from the cache and fills it on misses.
class CachingScorer final : public Scorer {
 public:
  CachingScorer(Scorer& inner, ScoreCache& cache)
      : inner_(inner), cache_(cache) {}

  std::string backend_id() const override { return inner_.backend_id(); }
  ScoreRecord score(const ScoreQuery& query) override;

 private:
  Scorer& inner_;
  ScoreCache& cache_;
};

}  // namespace zsc
