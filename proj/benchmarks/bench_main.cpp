#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "zsc/inference.hpp"
#include "zsc/logspace.hpp"
#include "zsc/mock_scorer.hpp"
#include "zsc/sampling.hpp"
#include "zsc/score_cache.hpp"

namespace {

using namespace zsc;

std::vector<double> random_scores(std::size_t m) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-80.0, -1.0);
  std::vector<double> s(m);
  for (auto& v : s) v = u(rng);
  return s;
}

void BM_Aggregate(benchmark::State& state) {
  const auto scores = random_scores(static_cast<std::size_t>(state.range(0)));
  const auto how = static_cast<Aggregation>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(scores, how));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Aggregate)->ArgsProduct({{1, 10, 20, 1000}, {0, 1, 2}});

void BM_MockScore(benchmark::State& state) {
  MockScorer mock;
  const ScoreQuery q{"mock", "This movie review leans positive:",
                     " " + std::string(static_cast<std::size_t>(state.range(0)), 'x'),
                     false};
  for (auto _ : state) benchmark::DoNotOptimize(mock.score(q));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MockScore)->Arg(16)->Arg(256)->Arg(4096);

void BM_Subsample(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  std::size_t run = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        subsample_descriptions(m, m / 2, SampleKey{7, run++}, 1, "0123456789abcdef"));
  }
}
BENCHMARK(BM_Subsample)->Arg(20)->Arg(200);

void BM_Predict(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("label" + std::to_string(i));
  const LabelSet labels(names);
  DescriptionPool pool;
  for (const auto& l : labels) {
    std::vector<std::string> descs;
    for (std::size_t i = 0; i < 20; ++i)
      descs.push_back("This text is about " + l.name + " variant " + std::to_string(i) + ":");
    pool.add(l.id, ContextAssignment{}, descs);
  }
  Example x;
  x.text = "an example sentence of moderate length for scoring";
  MockScorer mock;
  const ModeSpec mode{Mode::kGenerative, Framing::kNone, false, Aggregation::kArithmetic};
  PredictOptions po{"mock", n, SampleKey{}, "", {}};
  for (auto _ : state) benchmark::DoNotOptimize(predict(x, pool, labels, mode, po, mock));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k * n));
}
BENCHMARK(BM_Predict)->ArgsProduct({{2, 6}, {1, 10}});

void BM_CacheHit(benchmark::State& state) {
  MockScorer mock;
  ScoreCache cache;
  CachingScorer cached(mock, cache);
  const ScoreQuery q{"mock", "prefix", " a continuation", false};
  cached.score(q);
  for (auto _ : state) benchmark::DoNotOptimize(cached.score(q));
}
BENCHMARK(BM_CacheHit);

}  // namespace
