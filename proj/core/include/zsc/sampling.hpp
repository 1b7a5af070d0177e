#pragma once

// Counter-based, keyed random streams. Every draw is a pure function of
// (key, counter), so samples for different (run, label, context) cells are
// independent of evaluation order and thread scheduling.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "zsc/model.hpp"

namespace zsc {

class KeyedStream {
 public:
  explicit KeyedStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t next();
  // Unbiased draw from [0, bound); bound > 0.
  std::uint64_t uniform(std::uint64_t bound);
  // Uniform double in [0, 1).
  double uniform01();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Folds `value` into `key`.
std::uint64_t derive_key(std::uint64_t key, std::uint64_t value);
std::uint64_t derive_key(std::uint64_t key, std::string_view tag);

// Seed of run `run` under `base_seed`.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run);

struct SampleKey {
  std::uint64_t base_seed = 0;
  std::size_t run = 0;
};

// The first n draws of a seeded partial Fisher-Yates shuffle of 0..m-1, in
// draw order. For n1 < n2 under the same key, the n1 result is a prefix of
// the n2 result.
std::vector<std::size_t> sample_order(std::size_t m, std::size_t n,
                                      std::uint64_t key);

// Ascending indices of an n-of-m sample without replacement keyed by
// (base_seed, run, label, context fingerprint). Throws ConfigError unless
// 1 <= n <= m.
std::vector<std::size_t> subsample_descriptions(std::size_t m, std::size_t n,
                                                const SampleKey& key,
                                                LabelId label,
                                                std::string_view context_fp);

}  // namespace zsc
