#pragma once

// Classification modes over description pools.
//
//   generative          log p(x | z)            prefix z,          continuation " " + x
//   discriminative      log p(z | framed x)     prefix framed x,   continuation " " + z
//   discriminative-pmi  log p(z | framed x) - log p(z | NULL)
//
// Per-description scores for a label are reduced with one of three means of
// probabilities (logspace.hpp); the predicted label is the argmax. Label and
// description priors are uniform and drop out.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zsc/model.hpp"
#include "zsc/sampling.hpp"
#include "zsc/scoring.hpp"

namespace zsc {

// Bumped when the demonstration rendering below changes.
inline constexpr int kIclFormatVersion = 1;

// Scores within this distance of the maximum count as tied.
inline constexpr double kTieTolerance = 1e-12;

struct ModeSpec {
  Mode mode = Mode::kGenerative;
  Framing framing = Framing::kNone;  // ignored in generative mode
  bool use_context = true;
  Aggregation aggregation = Aggregation::kArithmetic;

  static ModeSpec from(const RunConfig& config) {
    return {config.mode, config.framing, config.use_context,
            config.aggregation};
  }

  friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

nlohmann::json to_json(const ModeSpec& mode);

// "positive or negative"; "a, b, or c" for three or more.
std::string label_name_list(const LabelSet& labels);

// Discriminative prefix for `x` under `framing`:
//   none      x
//   context   "This is a {domain}. " + x
//   instruct  "Is this {domain} {label list}? " + x
// The domain comes from the example's first context assignment; framings
// that need it throw ConfigError when it is absent.
std::string frame_input(const Example& x, Framing framing,
                        const LabelSet& labels);

// One query per description, scores in description order. ScorerErrors are
// rethrown with the description index attached. `demo_prefix` is prepended
// to every prefix (few-shot prompting); empty for zero-shot.
std::vector<double> score_generative(std::string_view text,
                                     std::span<const std::string> descs,
                                     Scorer& scorer,
                                     std::string_view model_id,
                                     std::string_view demo_prefix = {});

std::vector<double> score_discriminative(const Example& x,
                                         std::span<const std::string> descs,
                                         Framing framing,
                                         const LabelSet& labels,
                                         Scorer& scorer,
                                         std::string_view model_id,
                                         std::string_view demo_prefix = {});

std::vector<double> score_pmi(const Example& x,
                              std::span<const std::string> descs,
                              Framing framing, const LabelSet& labels,
                              Scorer& scorer, std::string_view model_id,
                              std::string_view demo_prefix = {});

// Scores used by one label: one group per context assignment, in ascending
// context fingerprint order.
struct DescriptionGroup {
  std::string context_fp;
  std::vector<std::size_t> indices;  // ascending pool indices
  std::vector<double> scores;        // raw per-description log-scores
};

struct Prediction {
  std::vector<double> scores;  // aggregated, indexed by label id
  LabelId argmax = 0;          // smallest id attaining the maximum
  bool tie = false;            // >= 2 labels within kTieTolerance of max
  ModeSpec mode;
  std::vector<std::vector<DescriptionGroup>> provenance;  // by label id
  std::vector<double> log_priors;  // empty = uniform
  int icl_format_version = 0;      // 0 = zero-shot
};

nlohmann::json to_json(const Prediction& p, const LabelSet& labels);

struct PredictOptions {
  std::string model_id;
  std::size_t num_descriptions = 1;
  SampleKey sample;
  std::string demo_prefix;
  // Optional per-label log prior added after aggregation. Empty = uniform.
  std::vector<double> log_priors;
};

// Argmax with smallest-id tie-break.
void resolve_argmax(Prediction& p);

// Samples num_descriptions per (label, context) via subsample_descriptions,
// scores them under `mode`, pools every context's scores for a label into
// one aggregation, and takes the argmax. With use_context off, the pool is
// read under the empty context.
Prediction predict(const Example& x, const DescriptionPool& pool,
                   const LabelSet& labels, const ModeSpec& mode,
                   const PredictOptions& options, Scorer& scorer);

struct Demonstration {
  std::string text;
  std::string description;
  LabelId label = 0;
};

struct IclPrompt {
  std::vector<Demonstration> demos;  // rendered order
  std::string test_text;
  // Demonstration blocks only; the scoring op appends the test item.
  //   generative:      "<desc> <text>\n\n" per demo
  //   discriminative:  "<text> <desc>\n\n" per demo
  std::string rendered;
};

// Orders `demos` by a seeded shuffle and renders them with the index-0
// description of each demo's (label, context). Demos without context borrow
// the test example's context when use_context is on. Throws ConfigError on a
// demo without a gold label.
IclPrompt build_icl_prompt(std::span<const Example> demos, const Example& x,
                           const DescriptionPool& pool, const ModeSpec& mode,
                           std::uint64_t seed);

// k corpus texts sampled without replacement, each given a uniformly random
// label. Throws ConfigError when the corpus has fewer than k texts.
std::vector<Example> build_zicl_demos(std::span<const std::string> corpus,
                                      std::size_t k, const LabelSet& labels,
                                      std::uint64_t seed);

}  // namespace zsc
