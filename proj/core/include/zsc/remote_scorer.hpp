#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <string>

#include "zsc/scoring.hpp"
#include "zsc/wire.hpp"

namespace zsc {

struct RemoteScorerOptions {
  // scheme://host:port, e.g. "http://127.0.0.1:8000".
  std::string endpoint;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_in_flight = 4;
  // Queries issued together by score_batch.
  std::size_t batch_size = 8;
};

// HTTP client for the scoring wire protocol. Thread-safe; each request uses
// its own connection and at most max_in_flight requests run at once.
class RemoteScorer final : public Scorer {
 public:
  explicit RemoteScorer(RemoteScorerOptions options);

  std::string backend_id() const override { return "remote-v1"; }
  ScoreRecord score(const ScoreQuery& query) override;
  std::vector<ScoreRecord> score_batch(
      std::span<const ScoreQuery> queries) override;

  wire::Health health();

  const RemoteScorerOptions& options() const { return options_; }

 private:
  class Slot;

  nlohmann::json post(const char* path, const nlohmann::json& body);

  RemoteScorerOptions options_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
};

}  // namespace zsc
