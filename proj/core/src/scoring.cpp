#include "zsc/scoring.hpp"

#include <cmath>

#include "zsc/errors.hpp"

namespace zsc {

void check_query(const ScoreQuery& q) {
  if (q.continuation.empty())
    throw ScorerError(ScorerError::Kind::kInvalidQuery,
                      "score query continuation must be non-empty");
}

double sum_logprobs(std::span<const TokenScore> tokens) {
  double total = 0.0;
  for (const auto& t : tokens) total += t.logprob;
  return total;
}

void validate_record(const ScoreRecord& record, double total_tolerance) {
  const std::string& cont = record.query.continuation;
  std::size_t cursor = 0;
  for (const auto& tok : record.tokens) {
    if (tok.start != cursor || tok.end <= tok.start || tok.end > cont.size()) {
      throw ScorerError(ScorerError::Kind::kProtocol,
                        "token spans do not tile the continuation at offset " +
                            std::to_string(cursor));
    }
    if (cont.compare(tok.start, tok.end - tok.start, tok.text) != 0) {
      throw ScorerError(ScorerError::Kind::kProtocol,
                        "token text does not match its span at offset " +
                            std::to_string(tok.start));
    }
    if (std::isnan(tok.logprob) || (record.normalized && tok.logprob > 0.0)) {
      throw ScorerError(ScorerError::Kind::kProtocol,
                        "invalid token logprob at offset " +
                            std::to_string(tok.start));
    }
    cursor = tok.end;
  }
  if (cursor != cont.size()) {
    throw ScorerError(ScorerError::Kind::kProtocol,
                      "token spans cover " + std::to_string(cursor) + " of " +
                          std::to_string(cont.size()) + " continuation bytes");
  }
  if (std::abs(sum_logprobs(record.tokens) - record.total_logprob) >
      total_tolerance) {
    throw ScorerError(ScorerError::Kind::kProtocol,
                      "total_logprob disagrees with the token sum");
  }
}

ScoreRecord Scorer::score_null(std::string_view model_id,
                               std::string_view continuation) {
  ScoreQuery q;
  q.model_id = model_id;
  q.continuation = continuation;
  q.null_prefix = true;
  return score(q);
}

std::vector<ScoreRecord> Scorer::score_batch(
    std::span<const ScoreQuery> queries) {
  std::vector<ScoreRecord> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(score(q));
  return out;
}

std::size_t utf8_sequence_length(std::string_view s, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(s[pos]);
  std::size_t len = 1;
  if (lead >= 0xF0 && lead <= 0xF4) {
    len = 4;
  } else if (lead >= 0xE0) {
    len = 3;
  } else if (lead >= 0xC2 && lead <= 0xDF) {
    len = 2;
  }
  if (lead >= 0xF5) len = 1;
  if (pos + len > s.size()) return 1;
  for (std::size_t i = 1; i < len; ++i) {
    if ((static_cast<unsigned char>(s[pos + i]) & 0xC0) != 0x80) return 1;
  }
  return len;
}

std::vector<std::size_t> utf8_boundaries(std::string_view s) {
  std::vector<std::size_t> out{0};
  std::size_t pos = 0;
  while (pos < s.size()) {
    pos += utf8_sequence_length(s, pos);
    out.push_back(pos);
  }
  return out;
}

}  // namespace zsc
