#include "zsc/sampling.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "zsc/errors.hpp"
#include "zsc/hashing.hpp"

namespace zsc {

std::uint64_t KeyedStream::next() {
  return mix64(key_ ^ mix64(counter_++));
}

std::uint64_t KeyedStream::uniform(std::uint64_t bound) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = kMax - kMax % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

double KeyedStream::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t derive_key(std::uint64_t key, std::uint64_t value) {
  return mix64(key ^ mix64(value));
}

std::uint64_t derive_key(std::uint64_t key, std::string_view tag) {
  return derive_key(key, fnv1a64(tag));
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run) {
  return derive_key(mix64(base_seed), static_cast<std::uint64_t>(run));
}

std::vector<std::size_t> sample_order(std::size_t m, std::size_t n,
                                      std::uint64_t key) {
  n = std::min(n, m);
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  KeyedStream stream(key);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(stream.uniform(m - i));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(n);
  return perm;
}

std::vector<std::size_t> subsample_descriptions(std::size_t m, std::size_t n,
                                                const SampleKey& key,
                                                LabelId label,
                                                std::string_view context_fp) {
  if (n < 1 || n > m) {
    throw ConfigError("cannot sample " + std::to_string(n) +
                      " descriptions from a pool entry of size " +
                      std::to_string(m));
  }
  std::uint64_t k = derive_key(run_seed(key.base_seed, key.run),
                               static_cast<std::uint64_t>(label));
  k = derive_key(k, context_fp);
  auto out = sample_order(m, n, k);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace zsc
