#pragma once

// Evaluation protocol: seeded description subsampling repeated over several
// runs, macro-F1 per run, mean and population standard deviation across
// runs, and Cartesian sweeps over (use_context, n, aggregation).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsc/inference.hpp"
#include "zsc/model.hpp"
#include "zsc/scoring.hpp"

namespace zsc {

// Unweighted mean over all K classes of per-class F1 = 2PR/(P+R). A class
// whose precision or recall is undefined, or with P+R = 0, contributes 0;
// classes absent from both lists still count toward K. Throws ConfigError on
// length mismatch, empty input, or ids outside [0, K).
double macro_f1(std::span<const LabelId> preds, std::span<const LabelId> gold,
                std::size_t num_labels);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population (divide by R)
};

Summary summarize(std::span<const double> values);

struct SampledEntry {
  LabelId label = 0;
  std::string context_fp;
  std::vector<std::size_t> indices;
};

struct RunResult {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<SampledEntry> sampled;
  std::vector<Prediction> predictions;  // complete runs: one per example
  double macro_f1 = 0.0;
  bool complete = true;
  std::string error;  // set when incomplete
};

struct SweepCell {
  std::size_t num_descriptions = 0;
  Aggregation aggregation = Aggregation::kArithmetic;
  bool use_context = true;
};

struct EvaluationReport {
  std::string fingerprint;
  std::string model_id;
  RunConfig config;
  nlohmann::json config_echo;
  std::vector<RunResult> runs;
  Summary summary;  // over complete runs
  std::size_t runs_completed = 0;
  bool complete = true;
  std::optional<SweepCell> cell;
};

struct EvalInputs {
  const LabelSet* labels = nullptr;
  std::span<const Example> examples;
  const DescriptionPool* pool = nullptr;
  // Labeled demonstration candidates (shots > 0).
  std::span<const Example> demo_candidates;
  // Unlabeled texts for Z-ICL.
  std::span<const std::string> zicl_corpus;
};

struct EvalOptions {
  std::string model_id;
  std::size_t jobs = 1;
  // Merged into the report's config echo (CLI flags, backend, paths).
  nlohmann::json echo_extra = nlohmann::json::object();
  // Folded into the fingerprint alongside (config, pool, model_id).
  std::string fingerprint_extra;
};

// Digest of the demonstration data a config actually reads; empty when
// zero-shot.
std::string demonstration_digest(const RunConfig& config,
                                 const EvalInputs& inputs);

struct RunPlan {
  std::uint64_t seed = 0;
  std::vector<Example> demos;  // empty = zero-shot
};

// Seed and demonstrations of run `run`: `shots` labeled candidates, or k
// Z-ICL corpus texts with random labels.
RunPlan plan_run(const EvalInputs& inputs, const RunConfig& config,
                 std::size_t run);

// Runs config.num_runs independent runs. A scorer failure stops evaluation:
// the failing run is kept with the predictions made before the failure and
// marked incomplete. Throws ConfigError for configurations that cannot run.
EvaluationReport evaluate(const EvalInputs& inputs, const RunConfig& config,
                          Scorer& scorer, const EvalOptions& options);

struct SweepAxes {
  // An empty axis keeps the base config's value.
  std::vector<std::size_t> num_descriptions;
  std::vector<Aggregation> aggregation;
  std::vector<bool> use_context;
};

// Pool to use for a given use_context value.
using PoolProvider = std::function<const DescriptionPool&(bool use_context)>;

// One report per cell of use_context x n x aggregation (in that nesting
// order). All cells share base_seed, so cells that differ only in
// aggregation score identical description samples.
std::vector<EvaluationReport> sweep(const EvalInputs& inputs,
                                    const RunConfig& base,
                                    const SweepAxes& axes,
                                    const PoolProvider& pools, Scorer& scorer,
                                    const EvalOptions& options);

nlohmann::json to_json(const EvaluationReport& report, const LabelSet& labels);
// Pretty JSON plus trailing newline; byte-stable for equal inputs.
std::string serialize_report(const EvaluationReport& report,
                             const LabelSet& labels);
std::string serialize_sweep(std::span<const EvaluationReport> reports,
                            const LabelSet& labels);
// "run,macro_f1" rows for complete runs.
std::string report_csv(const EvaluationReport& report);

}  // namespace zsc
