#include "zsc/score_cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsc/errors.hpp"
#include "zsc/hashing.hpp"

namespace zsc {

namespace {

nlohmann::json record_to_line(const std::string& key,
                              std::string_view backend_id,
                              const ScoreRecord& r) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : r.tokens) {
    tokens.push_back({{"text", t.text},
                      {"logprob", t.logprob},
                      {"start", t.start},
                      {"end", t.end}});
  }
  return {{"key", key},
          {"backend", backend_id},
          {"model_id", r.query.model_id},
          {"prefix", r.query.prefix},
          {"null_prefix", r.query.null_prefix},
          {"continuation", r.query.continuation},
          {"token_logprobs", std::move(tokens)},
          {"total", r.total_logprob},
          {"normalized", r.normalized}};
}

struct ParsedLine {
  std::string key;
  std::string backend;
  ScoreRecord record;
};

// Throws on any structural problem.
ParsedLine line_to_record(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  ParsedLine p;
  p.key = j.at("key").get<std::string>();
  p.backend = j.at("backend").get<std::string>();
  ScoreRecord& r = p.record;
  r.query.model_id = j.at("model_id").get<std::string>();
  r.query.prefix = j.at("prefix").get<std::string>();
  r.query.null_prefix = j.at("null_prefix").get<bool>();
  r.query.continuation = j.at("continuation").get<std::string>();
  for (const auto& t : j.at("token_logprobs")) {
    r.tokens.push_back(TokenScore{t.at("text").get<std::string>(),
                                  t.at("logprob").get<double>(),
                                  t.at("start").get<std::size_t>(),
                                  t.at("end").get<std::size_t>()});
  }
  r.total_logprob = j.at("total").get<double>();
  r.normalized = j.at("normalized").get<bool>();
  validate_record(r);
  return p;
}

void warn(const std::filesystem::path& path, std::size_t line_no,
          const char* why) {
  std::clog << "zsc: warning: skipping corrupt cache line " << line_no
            << " of " << path.string() << " (" << why << ")\n";
}

class FileLock {
 public:
  explicit FileLock(int fd) : fd_(fd) {
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR)
        throw Error(std::string("cache: flock failed: ") + std::strerror(errno));
    }
  }
  ~FileLock() { ::flock(fd_, LOCK_UN); }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_;
};

}  // namespace

ScoreCache::ScoreCache(std::filesystem::path path) : path_(std::move(path)) {
  fd_ = ::open(path_->c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error("cache: cannot open " + path_->string() + ": " +
                std::strerror(errno));
  }
  load();
}

ScoreCache::~ScoreCache() {
  if (fd_ >= 0) ::close(fd_);
}

std::string ScoreCache::make_key(std::string_view backend_id,
                                 const ScoreQuery& q) {
  nlohmann::json parts = nlohmann::json::array(
      {backend_id, q.model_id, q.null_prefix,
       q.null_prefix ? std::string() : q.prefix, q.continuation,
       kAttributionRuleVersion});
  return sha256_hex(parts.dump());
}

void ScoreCache::load() {
  std::ifstream in(*path_);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ++stats_.loaded_lines;
    try {
      ParsedLine p = line_to_record(line);
      index_.insert_or_assign(p.key, std::pair{std::move(p.backend),
                                               std::move(p.record)});
    } catch (const nlohmann::json::exception&) {
      ++stats_.corrupt_lines;
      warn(*path_, line_no, "unparseable");
    } catch (const ScorerError&) {
      ++stats_.corrupt_lines;
      warn(*path_, line_no, "invalid record");
    }
  }
}

std::optional<ScoreRecord> ScoreCache::get(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second.second;
}

void ScoreCache::append_line(const std::string& line) {
  FileLock lock(fd_);
  std::size_t written = 0;
  while (written < line.size()) {
    ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("cache: write failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
}

void ScoreCache::put(const std::string& key, std::string_view backend_id,
                     const ScoreRecord& record) {
  std::unique_lock lock(mu_);
  if (fd_ >= 0) {
    append_line(record_to_line(key, backend_id, record).dump() + "\n");
    ++stats_.appended;
  }
  index_.insert_or_assign(key, std::pair{std::string(backend_id), record});
}

ScoreCache::Stats ScoreCache::stats() const {
  std::shared_lock lock(mu_);
  Stats s = stats_;
  s.records = index_.size();
  s.hits = hits_.load();
  s.misses = misses_.load();
  return s;
}

void ScoreCache::compact() {
  if (!path_) return;
  std::unique_lock lock(mu_);
  FileLock file_lock(fd_);
  // Deterministic output order.
  std::set<std::string> keys;
  for (const auto& [key, value] : index_) keys.insert(key);
  const auto tmp = std::filesystem::path(path_->string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& key : keys) {
      const auto& [backend, record] = index_.at(key);
      out << record_to_line(key, backend, record).dump() << '\n';
    }
    if (!out) throw Error("cache: failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, *path_);
  ::close(fd_);
  fd_ = ::open(path_->c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cache: cannot reopen " + path_->string());
  stats_.loaded_lines = keys.size();
  stats_.corrupt_lines = 0;
}

CacheVerifyReport verify_cache_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cache: cannot open " + path.string());
  CacheVerifyReport report;
  std::set<std::string> keys;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++report.lines;
    try {
      ParsedLine p = line_to_record(line);
      if (ScoreCache::make_key(p.backend, p.record.query) != p.key) {
        ++report.key_mismatch;
        continue;
      }
      ++report.valid;
      if (!keys.insert(p.key).second) ++report.duplicates;
    } catch (const nlohmann::json::exception&) {
      ++report.corrupt;
    } catch (const ScorerError&) {
      ++report.corrupt;
    }
  }
  report.unique_keys = keys.size();
  return report;
}

ScoreRecord CachingScorer::score(const ScoreQuery& query) {
  check_query(query);
  const std::string backend = inner_.backend_id();
  const std::string key = ScoreCache::make_key(backend, query);
  if (auto hit = cache_.get(key)) {
    // Cached records carry the query they were stored under; it is equal by
    // key construction.
    return *std::move(hit);
  }
  ScoreRecord record = inner_.score(query);
  cache_.put(key, backend, record);
  return record;
}

}  // namespace zsc
