#pragma once

#include <span>

#include "zsc/model.hpp"

namespace zsc {

// log(sum(exp(v))) with the max-shift trick. -inf for an empty list or when
// every element is -inf; +inf if any element is +inf.
double logsumexp(std::span<const double> values);

// Mean of probabilities given as log-probabilities, reduced in list order:
//   arithmetic  logsumexp(s) - log m
//   geometric   mean(s)
//   harmonic    log m - logsumexp(-s)
// Throws ConfigError on an empty list and Error on NaN or +inf. -inf entries
// contribute zero probability: arithmetic is -inf only when all are, geometric
// and harmonic are -inf when any is.
double aggregate(std::span<const double> log_scores, Aggregation strategy);

}  // namespace zsc
