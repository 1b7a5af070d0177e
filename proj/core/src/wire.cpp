#include "zsc/wire.hpp"

#include <algorithm>
#include <cmath>

#include "zsc/errors.hpp"

namespace zsc::wire {

namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  throw ScorerError(ScorerError::Kind::kProtocol, "wire protocol: " + what);
}

std::size_t byte_to_code_point(const std::vector<std::size_t>& bounds,
                               std::size_t byte) {
  auto it = std::lower_bound(bounds.begin(), bounds.end(), byte);
  if (it == bounds.end() || *it != byte)
    protocol_error("offset is not on a code point boundary");
  return static_cast<std::size_t>(it - bounds.begin());
}

}  // namespace

const char* path_for(const ScoreQuery& q) {
  return q.null_prefix ? kScoreNullPath : kScorePath;
}

nlohmann::json encode_request(const ScoreQuery& q) {
  nlohmann::json j{{"model", q.model_id}, {"continuation", q.continuation}};
  if (!q.null_prefix) j["prefix"] = q.prefix;
  return j;
}

ScoreQuery decode_request(const nlohmann::json& j, bool null_path) {
  ScoreQuery q;
  try {
    q.model_id = j.at("model").get<std::string>();
    q.continuation = j.at("continuation").get<std::string>();
    if (!null_path) q.prefix = j.at("prefix").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    protocol_error(std::string("bad request: ") + e.what());
  }
  q.null_prefix = null_path;
  return q;
}

nlohmann::json encode_response(const ScoreRecord& record) {
  const auto bounds = utf8_boundaries(record.query.continuation);
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : record.tokens) {
    tokens.push_back({{"text", t.text},
                      {"logprob", t.logprob},
                      {"start", byte_to_code_point(bounds, t.start)},
                      {"end", byte_to_code_point(bounds, t.end)}});
  }
  return {{"tokens", std::move(tokens)},
          {"total_logprob", record.total_logprob}};
}

ScoreRecord decode_response(const nlohmann::json& j, const ScoreQuery& q) {
  if (!j.is_object() || !j.contains("tokens") || !j["tokens"].is_array() ||
      !j.contains("total_logprob") || !j["total_logprob"].is_number())
    protocol_error("response needs 'tokens' and 'total_logprob'");
  const auto bounds = utf8_boundaries(q.continuation);
  ScoreRecord record;
  record.query = q;
  for (const auto& tj : j["tokens"]) {
    TokenScore t;
    std::size_t start = 0, end = 0;
    try {
      t.text = tj.at("text").get<std::string>();
      t.logprob = tj.at("logprob").get<double>();
      start = tj.at("start").get<std::size_t>();
      end = tj.at("end").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      protocol_error(std::string("bad token entry: ") + e.what());
    }
    if (start >= bounds.size() || end >= bounds.size())
      protocol_error("token span outside the continuation");
    t.start = bounds[start];
    t.end = bounds[end];
    record.tokens.push_back(std::move(t));
  }
  const double server_total = j["total_logprob"].get<double>();
  record.total_logprob = sum_logprobs(record.tokens);
  // Servers may accumulate in float32.
  if (std::abs(server_total - record.total_logprob) >
      1e-4 * std::max(1.0, std::abs(server_total)))
    protocol_error("total_logprob disagrees with the token sum");
  validate_record(record);
  return record;
}

nlohmann::json encode_health(const Health& h) {
  return {{"model", h.model}, {"context_length", h.context_length}};
}

Health decode_health(const nlohmann::json& j) {
  try {
    return Health{j.at("model").get<std::string>(),
                  j.at("context_length").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    protocol_error(std::string("bad health response: ") + e.what());
  }
}

nlohmann::json encode_error(const std::string& error,
                            const std::string& detail) {
  return {{"error", error}, {"detail", detail}};
}

}  // namespace zsc::wire
