#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "zsc/errors.hpp"
#include "zsc/sampling.hpp"

namespace zsc {
namespace {

TEST(Subsample, FullSizeReturnsEveryIndex) {
  auto idx = subsample_descriptions(7, 7, SampleKey{3, 1}, 0, "ctx");
  EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(Subsample, DeterministicAndAscendingWithoutReplacement) {
  const SampleKey key{42, 3};
  auto a = subsample_descriptions(21, 5, key, 1, "abc");
  EXPECT_EQ(a, subsample_descriptions(21, 5, key, 1, "abc"));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 5u);
  EXPECT_LT(a.back(), 21u);
}

TEST(Subsample, RejectsOutOfRangeN) {
  EXPECT_THROW(subsample_descriptions(5, 0, {}, 0, ""), ConfigError);
  EXPECT_THROW(subsample_descriptions(5, 6, {}, 0, ""), ConfigError);
}

TEST(Subsample, KeyComponentsSelectIndependentStreams) {
  const auto base = subsample_descriptions(1000, 10, SampleKey{1, 0}, 0, "c");
  EXPECT_NE(base, subsample_descriptions(1000, 10, SampleKey{2, 0}, 0, "c"));
  EXPECT_NE(base, subsample_descriptions(1000, 10, SampleKey{1, 1}, 0, "c"));
  EXPECT_NE(base, subsample_descriptions(1000, 10, SampleKey{1, 0}, 1, "c"));
  EXPECT_NE(base, subsample_descriptions(1000, 10, SampleKey{1, 0}, 0, "d"));
}

TEST(Subsample, SingleDrawIsUniformWithinThreeSigma) {
  constexpr std::size_t kTrials = 10000, kM = 10;
  std::vector<std::size_t> counts(kM, 0);
  for (std::size_t t = 0; t < kTrials; ++t)
    ++counts[subsample_descriptions(kM, 1, SampleKey{2024, t}, 0, "fp")[0]];
  const double expected = kTrials / static_cast<double>(kM);
  const double sigma = std::sqrt(kTrials * 0.1 * 0.9);
  for (std::size_t c : counts)
    EXPECT_LE(std::abs(static_cast<double>(c) - expected), 3 * sigma);
}

TEST(SampleOrder, SmallerSamplesArePrefixesOfLarger) {
  for (std::uint64_t key = 0; key < 50; ++key) {
    const auto full = sample_order(20, 20, key);
    for (std::size_t n = 1; n <= 20; ++n) {
      const auto part = sample_order(20, n, key);
      ASSERT_TRUE(std::equal(part.begin(), part.end(), full.begin()));
    }
    auto sorted = full;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 20; ++i) ASSERT_EQ(sorted[i], i);
  }
}

TEST(SampleOrder, NestedSubsamplesAcrossN) {
  const SampleKey key{9, 4};
  for (std::size_t n = 1; n < 10; ++n) {
    auto small = subsample_descriptions(10, n, key, 2, "x");
    auto large = subsample_descriptions(10, n + 1, key, 2, "x");
    EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(),
                              small.end()));
  }
}

TEST(KeyedStream, UniformStaysInBounds) {
  KeyedStream s(5);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_LT(s.uniform(7), 7u);
    const double u = s.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace zsc
