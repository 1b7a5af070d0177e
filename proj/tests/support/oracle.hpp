#pragma once

// Brute-force reference implementations used by tests. Nothing here calls
// the scorer, inference or evaluation code it checks; only data types and
// the shared sampling procedure are reused.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "zsc/model.hpp"
#include "zsc/sampling.hpp"

namespace zsc::oracle {

inline std::uint64_t fnv(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Splits valid UTF-8 into code points by attaching continuation bytes to the
// preceding lead byte.
inline std::vector<std::string> code_points(std::string_view s) {
  std::vector<std::string> out;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) == 0x80 && !out.empty()) {
      out.back().push_back(c);
    } else {
      out.emplace_back(1, c);
    }
  }
  return out;
}

// Mock total: sum over continuation code points of -(1 + (h mod 97)/97),
// h = FNV-1a of the window of up to 5 code points ending at that one.
inline double mock_total(std::string_view prefix, std::string_view continuation,
                         bool null_prefix = false) {
  const std::string context = null_prefix ? std::string(1, '\0')
                                          : std::string(prefix);
  const auto before = code_points(context);
  const auto after = code_points(continuation);
  std::vector<std::string> all = before;
  all.insert(all.end(), after.begin(), after.end());
  double total = 0.0;
  for (std::size_t i = before.size(); i < all.size(); ++i) {
    std::string window;
    const std::size_t from = i >= 4 ? i - 4 : 0;
    for (std::size_t j = from; j <= i; ++j) window += all[j];
    const std::uint64_t h = fnv(window);
    total += -(1.0 + static_cast<double>(h % 97) / 97.0);
  }
  return total;
}

inline double log_mean(const std::vector<double>& s, Aggregation how) {
  const double m = static_cast<double>(s.size());
  if (s.size() == 1) return s[0];
  if (how == Aggregation::kGeometric) {
    double sum = 0.0;
    for (double v : s) sum += v;
    return sum / m;
  }
  if (how == Aggregation::kArithmetic) {
    double top = s[0];
    for (double v : s) top = v > top ? v : top;
    double acc = 0.0;
    for (double v : s) acc += std::exp(v - top);
    return top + std::log(acc) - std::log(m);
  }
  double top = -s[0];
  for (double v : s) top = -v > top ? -v : top;
  double acc = 0.0;
  for (double v : s) acc += std::exp(-v - top);
  return std::log(m) - (top + std::log(acc));
}

inline std::string domain_of(const Example& x) {
  auto d = x.context().get("domain");
  return d ? std::string(*d) : std::string();
}

inline std::string disc_prefix(const Example& x, Framing framing,
                               const LabelSet& labels) {
  switch (framing) {
    case Framing::kNone:
      return x.text;
    case Framing::kContext:
      return "This is a " + domain_of(x) + ". " + x.text;
    case Framing::kInstruct: {
      std::vector<std::string> names;
      for (const auto& l : labels) names.push_back(l.name);
      std::string list;
      if (names.size() == 2) {
        list = names[0] + " or " + names[1];
      } else {
        for (std::size_t i = 0; i < names.size(); ++i)
          list += (i + 1 == names.size() ? "or " + names[i] : names[i] + ", ");
      }
      return "Is this " + domain_of(x) + " " + list + "? " + x.text;
    }
  }
  return {};
}

// Log-score of one description under `mode`, written from the definitions.
inline double description_score(const Example& x, const std::string& desc,
                                 Mode mode, Framing framing,
                                 const LabelSet& labels) {
  switch (mode) {
    case Mode::kGenerative:
      return mock_total(desc, " " + x.text);
    case Mode::kDiscriminative:
      return mock_total(disc_prefix(x, framing, labels), " " + desc);
    case Mode::kDiscriminativePmi:
      return mock_total(disc_prefix(x, framing, labels), " " + desc) -
             mock_total("", " " + desc, /*null_prefix=*/true);
  }
  return 0.0;
}

struct OraclePrediction {
  std::vector<double> scores;
  LabelId argmax = 0;
  bool tie = false;
};

// Scores every description of every relevant pool entry, then keeps the
// sampled ones and reduces them per label.
inline OraclePrediction predict(const Example& x, const DescriptionPool& pool,
                                const LabelSet& labels, Mode mode,
                                Framing framing, bool use_context,
                                Aggregation agg, std::size_t n,
                                const SampleKey& key) {
  std::map<std::string, ContextAssignment> ctxs;
  if (use_context) {
    for (const auto& c : x.contexts) ctxs.emplace(c.fingerprint(), c);
  } else {
    ctxs.emplace(ContextAssignment{}.fingerprint(), ContextAssignment{});
  }
  OraclePrediction out;
  for (const auto& label : labels) {
    std::vector<double> kept;
    for (const auto& [fp, ctx] : ctxs) {
      const auto& descs = pool.at(label.id, ctx).descriptions;
      std::vector<double> all;
      for (const auto& d : descs)
        all.push_back(description_score(x, d, mode, framing, labels));
      for (std::size_t i :
           subsample_descriptions(descs.size(), n, key, label.id, fp))
        kept.push_back(all[i]);
    }
    out.scores.push_back(log_mean(kept, agg));
  }
  double best = out.scores[0];
  for (std::size_t i = 1; i < out.scores.size(); ++i) {
    if (out.scores[i] > best) {
      best = out.scores[i];
      out.argmax = static_cast<LabelId>(i);
    }
  }
  int near = 0;
  for (double s : out.scores) near += (s == best || best - s <= 1e-12) ? 1 : 0;
  out.tie = near >= 2;
  return out;
}

// Macro-F1 from an explicit K x K confusion matrix.
inline double macro_f1(const std::vector<LabelId>& preds,
                       const std::vector<LabelId>& gold, std::size_t k) {
  std::vector<std::vector<std::size_t>> confusion(
      k, std::vector<std::size_t>(k, 0));  // [gold][pred]
  for (std::size_t i = 0; i < preds.size(); ++i)
    ++confusion[static_cast<std::size_t>(gold[i])]
               [static_cast<std::size_t>(preds[i])];
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t col = 0, row = 0;
    for (std::size_t j = 0; j < k; ++j) {
      col += confusion[j][c];
      row += confusion[c][j];
    }
    const std::size_t hit = confusion[c][c];
    if (col == 0 || row == 0 || hit == 0) continue;
    const double p = static_cast<double>(hit) / static_cast<double>(col);
    const double r = static_cast<double>(hit) / static_cast<double>(row);
    sum += 2.0 * p * r / (p + r);
  }
  return sum / static_cast<double>(k);
}

}  // namespace zsc::oracle
