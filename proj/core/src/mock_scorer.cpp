#include "zsc/mock_scorer.hpp"

#include "zsc/errors.hpp"
#include "zsc/hashing.hpp"

namespace zsc {

double MockScorer::char_logprob(std::string_view window) {
  const std::uint64_t h = fnv1a64(window);
  return -(1.0 + static_cast<double>(h % 97) / 97.0);
}

ScoreRecord MockScorer::score(const ScoreQuery& query) {
  check_query(query);
  const std::string_view prefix =
      query.null_prefix ? kNullMarker : std::string_view(query.prefix);
  std::string full;
  full.reserve(prefix.size() + query.continuation.size());
  full.append(prefix);
  full.append(query.continuation);

  const std::vector<std::size_t> bounds = utf8_boundaries(full);
  // bounds[i] is the start of code point i; find the first continuation one.
  std::size_t first = 0;
  while (bounds[first] < prefix.size()) ++first;
  if (bounds[first] != prefix.size()) {
    throw ScorerError(ScorerError::Kind::kRejected,
                      "token straddles the prefix/continuation boundary");
  }

  ScoreRecord record;
  record.query = query;
  record.normalized = false;
  const std::size_t count = bounds.size() - 1;
  for (std::size_t i = first; i < count; ++i) {
    const std::size_t window_start =
        bounds[i + 1 >= kOrder ? i + 1 - kOrder : 0];
    const std::string_view window(full.data() + window_start,
                                  bounds[i + 1] - window_start);
    TokenScore tok;
    tok.start = bounds[i] - prefix.size();
    tok.end = bounds[i + 1] - prefix.size();
    tok.text = full.substr(bounds[i], bounds[i + 1] - bounds[i]);
    tok.logprob = char_logprob(window);
    record.tokens.push_back(std::move(tok));
  }
  record.total_logprob = sum_logprobs(record.tokens);
  return record;
}

}  // namespace zsc
