#include "zsc/logspace.hpp"

#include <cmath>
#include <limits>

#include "zsc/errors.hpp"

namespace zsc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double logsumexp(std::span<const double> values) {
  double max = kNegInf;
  for (double v : values) {
    if (v > max) max = v;
  }
  if (std::isinf(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

double aggregate(std::span<const double> log_scores, Aggregation strategy) {
  if (log_scores.empty()) throw ConfigError("aggregate: empty score list");
  bool any_neg_inf = false;
  for (double v : log_scores) {
    if (std::isnan(v)) throw Error("aggregate: NaN log-score");
    if (v == std::numeric_limits<double>::infinity())
      throw Error("aggregate: +inf log-score");
    any_neg_inf = any_neg_inf || std::isinf(v);
  }
  const double m = static_cast<double>(log_scores.size());
  if (log_scores.size() == 1) return log_scores.front();

  switch (strategy) {
    case Aggregation::kArithmetic:
      return logsumexp(log_scores) - std::log(m);
    case Aggregation::kGeometric: {
      if (any_neg_inf) return kNegInf;
      double sum = 0.0;
      for (double v : log_scores) sum += v;
      return sum / m;
    }
    case Aggregation::kHarmonic: {
      if (any_neg_inf) return kNegInf;
      // logsumexp over negated scores, written out to avoid a copy.
      double max = kNegInf;
      for (double v : log_scores) max = std::max(max, -v);
      double sum = 0.0;
      for (double v : log_scores) sum += std::exp(-v - max);
      return std::log(m) - (max + std::log(sum));
    }
  }
  throw ConfigError("aggregate: unknown strategy");
}

}  // namespace zsc
