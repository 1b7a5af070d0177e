#pragma once

// Scorer contract: conditional token log-probabilities of a continuation
// given a prefix. Natural log throughout.
//
// Attribution rule: the backend tokenizes prefix+continuation jointly and a
// token belongs to the continuation iff its span starts at or after
// len(prefix). A token straddling the boundary is an error.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zsc {

// Bumped whenever the attribution rule changes; part of every cache key.
inline constexpr int kAttributionRuleVersion = 1;

struct ScoreQuery {
  std::string model_id;
  std::string prefix;  // empty = unconditional
  std::string continuation;
  // Condition on the backend's designated null context instead of `prefix`.
  bool null_prefix = false;

  friend bool operator==(const ScoreQuery&, const ScoreQuery&) = default;
};

struct TokenScore {
  std::string text;
  double logprob = 0.0;
  // Byte offsets into the continuation, [start, end).
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const TokenScore&, const TokenScore&) = default;
};

struct ScoreRecord {
  ScoreQuery query;
  std::vector<TokenScore> tokens;
  double total_logprob = 0.0;
  // False for backends whose per-token values are not a distribution (mock).
  bool normalized = true;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

// Throws ScorerError(kInvalidQuery) for an empty continuation.
void check_query(const ScoreQuery& q);

// Throws ScorerError(kProtocol) unless spans tile the continuation exactly,
// token texts match their spans, and the total equals the token sum within
// `total_tolerance`.
void validate_record(const ScoreRecord& record, double total_tolerance = 1e-9);

// Sum of token logprobs in token order.
double sum_logprobs(std::span<const TokenScore> tokens);

class Scorer {
 public:
  virtual ~Scorer() = default;

  // Stable identifier of the backend, folded into cache keys.
  virtual std::string backend_id() const = 0;

  // Deterministic for a fixed backend and model id. Safe to call
  // concurrently.
  virtual ScoreRecord score(const ScoreQuery& query) = 0;

  ScoreRecord score_null(std::string_view model_id,
                         std::string_view continuation);

  // Results in query order, identical to sequential score() calls.
  virtual std::vector<ScoreRecord> score_batch(
      std::span<const ScoreQuery> queries);
};

// UTF-8 helpers shared by the mock and the wire codec. Invalid sequences are
// treated as single bytes.
std::size_t utf8_sequence_length(std::string_view s, std::size_t pos);
// Byte offsets of code point boundaries, including 0 and s.size().
std::vector<std::size_t> utf8_boundaries(std::string_view s);

}  // namespace zsc
