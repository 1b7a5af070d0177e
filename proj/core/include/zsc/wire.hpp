#pragma once

// JSON codec for the scoring wire protocol.
//
//   POST /v1/score       {model, prefix, continuation}
//   POST /v1/score_null  {model, continuation}
//   response             {tokens: [{text, logprob, start, end}], total_logprob}
//   GET  /v1/health      {model, context_length}
//   errors               HTTP 422 {error, detail}
//
// Wire offsets count Unicode code points into the continuation; in memory
// they are byte offsets.

#include <string>

#include <nlohmann/json.hpp>

#include "zsc/scoring.hpp"

namespace zsc::wire {

inline constexpr const char* kScorePath = "/v1/score";
inline constexpr const char* kScoreNullPath = "/v1/score_null";
inline constexpr const char* kHealthPath = "/v1/health";

struct Health {
  std::string model;
  std::size_t context_length = 0;
};

const char* path_for(const ScoreQuery& q);
nlohmann::json encode_request(const ScoreQuery& q);
// Inverse of encode_request; `null_path` selects the score_null shape.
ScoreQuery decode_request(const nlohmann::json& j, bool null_path);

nlohmann::json encode_response(const ScoreRecord& record);
// Throws ScorerError(kProtocol) on malformed documents or failed tiling.
ScoreRecord decode_response(const nlohmann::json& j, const ScoreQuery& q);

nlohmann::json encode_health(const Health& h);
Health decode_health(const nlohmann::json& j);

nlohmann::json encode_error(const std::string& error, const std::string& detail);

}  // namespace zsc::wire
