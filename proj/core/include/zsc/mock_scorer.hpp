#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "zsc/scoring.hpp"

namespace zsc {

// Deterministic per-character scorer for oracle testing. One token per UTF-8
// code point; each code point c scores
//
//   logprob(c | previous 4 code points) = -(1 + (h mod 97) / 97)
//
// where h is the 64-bit FNV-1a hash of the bytes of the (up to) 5-code-point
// window ending at c. The window reaches across the prefix/continuation
// boundary, so the chain rule holds exactly. Values are not normalized.
class MockScorer final : public Scorer {
 public:
  // The null context is the single NUL character.
  static constexpr std::string_view kNullMarker{"\0", 1};
  static constexpr std::size_t kOrder = 5;

  std::string backend_id() const override { return "mock-v1"; }
  ScoreRecord score(const ScoreQuery& query) override;

  // The per-character value for the window ending at the last code point of
  // `window`; exposed for benchmarks.
  static double char_logprob(std::string_view window);
};

}  // namespace zsc
