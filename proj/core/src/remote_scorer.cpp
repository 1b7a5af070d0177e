#include "zsc/remote_scorer.hpp"

#include <future>

#include "httplib.h"
#include "zsc/errors.hpp"

namespace zsc {

// Holds one in-flight permit for its lifetime.
class RemoteScorer::Slot {
 public:
  explicit Slot(RemoteScorer& owner) : owner_(owner) {
    std::unique_lock lock(owner_.mu_);
    owner_.cv_.wait(lock, [&] {
      return owner_.in_flight_ < owner_.options_.max_in_flight;
    });
    ++owner_.in_flight_;
  }
  ~Slot() {
    {
      std::lock_guard lock(owner_.mu_);
      --owner_.in_flight_;
    }
    owner_.cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  RemoteScorer& owner_;
};

RemoteScorer::RemoteScorer(RemoteScorerOptions options)
    : options_(std::move(options)) {
  if (options_.endpoint.empty())
    throw ConfigError("remote scorer endpoint is not set");
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  if (options_.batch_size == 0) options_.batch_size = 1;
}

namespace {

void configure(httplib::Client& client, std::chrono::milliseconds timeout) {
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
}

nlohmann::json parse_body(const std::string& body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw ScorerError(ScorerError::Kind::kProtocol,
                      "scorer returned a non-JSON body");
  }
}

std::string describe_error(const httplib::Result& res) {
  return httplib::to_string(res.error());
}

// Gateway and overload statuses mean the model is not serving.
ScorerError::Kind status_kind(int status) {
  return status == 502 || status == 503 || status == 504
             ? ScorerError::Kind::kUnreachable
             : ScorerError::Kind::kProtocol;
}

}  // namespace

nlohmann::json RemoteScorer::post(const char* path,
                                  const nlohmann::json& body) {
  Slot slot(*this);
  httplib::Client client(options_.endpoint);
  configure(client, options_.timeout);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw ScorerError(ScorerError::Kind::kUnreachable,
                      "scorer " + options_.endpoint + " unreachable: " +
                          describe_error(res));
  }
  if (res->status == 422) {
    auto err = parse_body(res->body);
    throw ScorerError(ScorerError::Kind::kRejected,
                      "scorer rejected query: " + err.value("error", "") +
                          " (" + err.value("detail", "") + ")");
  }
  if (res->status != 200) {
    throw ScorerError(status_kind(res->status),
                      "scorer returned HTTP " + std::to_string(res->status) +
                          ": " + res->body);
  }
  return parse_body(res->body);
}

ScoreRecord RemoteScorer::score(const ScoreQuery& query) {
  check_query(query);
  return wire::decode_response(
      post(wire::path_for(query), wire::encode_request(query)), query);
}

std::vector<ScoreRecord> RemoteScorer::score_batch(
    std::span<const ScoreQuery> queries) {
  std::vector<ScoreRecord> out;
  out.reserve(queries.size());
  for (std::size_t begin = 0; begin < queries.size();
       begin += options_.batch_size) {
    const std::size_t end = std::min(queries.size(), begin + options_.batch_size);
    std::vector<std::future<ScoreRecord>> pending;
    for (std::size_t i = begin; i < end; ++i) {
      pending.push_back(std::async(std::launch::async,
                                   [this, &q = queries[i]] { return score(q); }));
    }
    // get() in order; the first failure propagates after all have settled.
    std::exception_ptr first_error;
    for (auto& f : pending) {
      try {
        out.push_back(f.get());
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }
  return out;
}

wire::Health RemoteScorer::health() {
  Slot slot(*this);
  httplib::Client client(options_.endpoint);
  configure(client, options_.timeout);
  auto res = client.Get(wire::kHealthPath);
  if (!res) {
    throw ScorerError(ScorerError::Kind::kUnreachable,
                      "scorer " + options_.endpoint + " unreachable: " +
                          describe_error(res));
  }
  if (res->status != 200) {
    throw ScorerError(status_kind(res->status),
                      "health check returned HTTP " +
                          std::to_string(res->status));
  }
  return wire::decode_health(parse_body(res->body));
}

}  // namespace zsc
