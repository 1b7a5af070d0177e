#include "zsc/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "zsc/errors.hpp"
#include "zsc/hashing.hpp"
#include "zsc/score_cache.hpp"

namespace zsc {

double macro_f1(std::span<const LabelId> preds, std::span<const LabelId> gold,
                std::size_t num_labels) {
  if (preds.size() != gold.size())
    throw ConfigError("macro_f1: prediction and gold lengths differ");
  if (preds.empty()) throw ConfigError("macro_f1: empty input");
  if (num_labels == 0) throw ConfigError("macro_f1: no classes");
  std::vector<std::size_t> tp(num_labels), fp(num_labels), fn(num_labels);
  auto check = [&](LabelId id) {
    if (id < 0 || static_cast<std::size_t>(id) >= num_labels)
      throw ConfigError("macro_f1: label id " + std::to_string(id) +
                        " out of range");
    return static_cast<std::size_t>(id);
  };
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::size_t p = check(preds[i]);
    const std::size_t g = check(gold[i]);
    if (p == g) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < num_labels; ++k) {
    if (tp[k] + fp[k] == 0 || tp[k] + fn[k] == 0) continue;
    const double precision =
        static_cast<double>(tp[k]) / static_cast<double>(tp[k] + fp[k]);
    const double recall =
        static_cast<double>(tp[k]) / static_cast<double>(tp[k] + fn[k]);
    if (precision + recall == 0.0) continue;
    sum += 2.0 * precision * recall / (precision + recall);
  }
  return sum / static_cast<double>(num_labels);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  // Shifted by the first value: identical runs give a std of exactly 0.
  const double r = static_cast<double>(values.size());
  const double origin = values[0];
  double sum = 0.0;
  for (double v : values) sum += v - origin;
  const double shift = sum / r;
  double sq = 0.0;
  for (double v : values) sq += (v - origin - shift) * (v - origin - shift);
  s.mean = origin + shift;
  s.std = std::sqrt(sq / r);
  return s;
}

std::string demonstration_digest(const RunConfig& config,
                                 const EvalInputs& inputs) {
  if (config.zicl) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& t : inputs.zicl_corpus) j.push_back(t);
    return sha256_hex("zicl\x1f" + j.dump());
  }
  if (config.shots > 0) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& ex : inputs.demo_candidates)
      j.push_back(example_to_json(ex, *inputs.labels));
    return sha256_hex("icl\x1f" + j.dump());
  }
  return {};
}

RunPlan plan_run(const EvalInputs& inputs, const RunConfig& config,
                 std::size_t run) {
  RunPlan plan;
  plan.seed = run_seed(config.base_seed, run);
  if (config.zicl) {
    plan.demos = build_zicl_demos(inputs.zicl_corpus, config.zicl->k,
                                  *inputs.labels, plan.seed);
  } else if (config.shots > 0) {
    const auto picks = sample_order(inputs.demo_candidates.size(), config.shots,
                                    derive_key(plan.seed, "icl-demos"));
    for (std::size_t i : picks) plan.demos.push_back(inputs.demo_candidates[i]);
  }
  return plan;
}

namespace {

RunResult execute_run(const EvalInputs& inputs, const RunConfig& config,
                      std::size_t run, Scorer& scorer,
                      const EvalOptions& options) {
  const RunPlan plan = plan_run(inputs, config, run);
  const ModeSpec mode = ModeSpec::from(config);
  RunResult result;
  result.run = run;
  result.seed = plan.seed;

  const SampleKey key{config.base_seed, run};
  for (const auto& [pool_key, entry] : inputs.pool->entries()) {
    result.sampled.push_back(
        {pool_key.label, pool_key.context_fp,
         subsample_descriptions(entry.descriptions.size(),
                                config.num_descriptions, key, pool_key.label,
                                pool_key.context_fp)});
  }

  const std::size_t count = inputs.examples.size();
  std::vector<std::optional<Prediction>> slots(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex error_mu;
  std::size_t first_failure = count;
  std::string failure;

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      const Example& x = inputs.examples[i];
      try {
        PredictOptions po;
        po.model_id = options.model_id;
        po.num_descriptions = config.num_descriptions;
        po.sample = key;
        if (!plan.demos.empty()) {
          po.demo_prefix =
              build_icl_prompt(plan.demos, x, *inputs.pool, mode, plan.seed)
                  .rendered;
        }
        slots[i] = predict(x, *inputs.pool, *inputs.labels, mode, po, scorer);
      } catch (const ScorerError& e) {
        std::lock_guard lock(error_mu);
        if (i < first_failure) {
          first_failure = i;
          failure = "example " + std::to_string(i) + ": " + e.what();
        }
        stop.store(true);
        return;
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, count));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
  }

  // Keep the contiguous prefix of finished predictions.
  for (std::size_t i = 0; i < count && slots[i]; ++i)
    result.predictions.push_back(std::move(*slots[i]));

  if (first_failure < count || result.predictions.size() != count) {
    result.complete = false;
    result.error = failure.empty() ? "run interrupted" : failure;
    return result;
  }

  std::vector<LabelId> preds, gold;
  preds.reserve(count);
  gold.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    preds.push_back(result.predictions[i].argmax);
    gold.push_back(*inputs.examples[i].gold);
  }
  result.macro_f1 = macro_f1(preds, gold, inputs.labels->size());
  return result;
}

void check_inputs(const EvalInputs& inputs, const RunConfig& config) {
  if (!inputs.labels || !inputs.pool)
    throw ConfigError("evaluate: labels and pool are required");
  if (inputs.examples.empty()) throw ConfigError("evaluate: empty dataset");
  for (std::size_t i = 0; i < inputs.examples.size(); ++i) {
    if (!inputs.examples[i].gold)
      throw ConfigError("evaluate: example " + std::to_string(i) +
                        " has no gold label");
  }
  config.validate(*inputs.pool);
  if (config.shots > inputs.demo_candidates.size()) {
    throw ConfigError("shots " + std::to_string(config.shots) + " exceeds " +
                      std::to_string(inputs.demo_candidates.size()) +
                      " demonstration candidates");
  }
  if (config.zicl && config.zicl->k > inputs.zicl_corpus.size()) {
    throw ConfigError("Z-ICL k " + std::to_string(config.zicl->k) +
                      " exceeds corpus size " +
                      std::to_string(inputs.zicl_corpus.size()));
  }
}

}  // namespace

EvaluationReport evaluate(const EvalInputs& inputs, const RunConfig& config,
                          Scorer& scorer, const EvalOptions& options) {
  check_inputs(inputs, config);

  EvaluationReport report;
  report.model_id = options.model_id;
  report.config = config;
  report.config_echo = config.to_json();
  for (const auto& [k, v] : options.echo_extra.items()) report.config_echo[k] = v;
  report.fingerprint =
      fingerprint_config(config, *inputs.pool, options.model_id,
                         demonstration_digest(config, inputs) + "\x1f" +
                             options.fingerprint_extra);

  std::vector<double> scores;
  for (std::size_t run = 0; run < config.num_runs; ++run) {
    RunResult r = execute_run(inputs, config, run, scorer, options);
    const bool ok = r.complete;
    if (ok) scores.push_back(r.macro_f1);
    report.runs.push_back(std::move(r));
    if (!ok) {
      report.complete = false;
      break;
    }
  }
  report.runs_completed = scores.size();
  report.summary = summarize(scores);
  return report;
}

std::vector<EvaluationReport> sweep(const EvalInputs& inputs,
                                    const RunConfig& base,
                                    const SweepAxes& axes,
                                    const PoolProvider& pools, Scorer& scorer,
                                    const EvalOptions& options) {
  const std::vector<bool> contexts =
      axes.use_context.empty() ? std::vector<bool>{base.use_context}
                               : axes.use_context;
  const std::vector<std::size_t> ns =
      axes.num_descriptions.empty()
          ? std::vector<std::size_t>{base.num_descriptions}
          : axes.num_descriptions;
  const std::vector<Aggregation> aggs =
      axes.aggregation.empty() ? std::vector<Aggregation>{base.aggregation}
                               : axes.aggregation;

  // Cells share most queries; memoize in memory only.
  ScoreCache memo;
  CachingScorer cached(scorer, memo);

  std::vector<EvaluationReport> out;
  for (bool use_context : contexts) {
    const DescriptionPool& pool = pools(use_context);
    EvalInputs cell_inputs = inputs;
    cell_inputs.pool = &pool;
    for (std::size_t n : ns) {
      for (Aggregation agg : aggs) {
        RunConfig config = base;
        config.use_context = use_context;
        config.num_descriptions = n;
        config.aggregation = agg;
        EvaluationReport report = evaluate(cell_inputs, config, cached, options);
        report.cell = SweepCell{n, agg, use_context};
        const bool ok = report.complete;
        out.push_back(std::move(report));
        if (!ok) return out;
      }
    }
  }
  return out;
}

nlohmann::json to_json(const EvaluationReport& report, const LabelSet& labels) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) {
    nlohmann::json sampled = nlohmann::json::array();
    for (const auto& s : r.sampled) {
      sampled.push_back({{"label", labels.at(s.label).name},
                         {"context_fp", s.context_fp},
                         {"indices", s.indices}});
    }
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& p : r.predictions) preds.push_back(to_json(p, labels));
    nlohmann::json jr{{"run", r.run},
                      {"seed", r.seed},
                      {"complete", r.complete},
                      {"sampled", std::move(sampled)},
                      {"predictions", std::move(preds)}};
    if (r.complete) {
      jr["macro_f1"] = r.macro_f1;
    } else {
      jr["macro_f1"] = nullptr;
      jr["error"] = r.error;
    }
    runs.push_back(std::move(jr));
  }
  nlohmann::json j{
      {"fingerprint", report.fingerprint},
      {"model_id", report.model_id},
      {"config", report.config_echo},
      {"complete", report.complete},
      {"runs", std::move(runs)},
      {"summary",
       {{"mean_macro_f1", report.summary.mean},
        {"std_macro_f1", report.summary.std},
        {"std_kind", "population"},
        {"runs_completed", report.runs_completed},
        {"runs_requested", report.config.num_runs}}},
      {"notes",
       {"run seeds derive from base_seed and run index only, so every mode "
        "and aggregation evaluated with the same base_seed sees the same "
        "description samples"}}};
  if (report.cell) {
    j["cell"] = {{"num_descriptions", report.cell->num_descriptions},
                 {"aggregation", to_string(report.cell->aggregation)},
                 {"use_context", report.cell->use_context}};
  }
  return j;
}

std::string serialize_report(const EvaluationReport& report,
                             const LabelSet& labels) {
  return to_json(report, labels).dump(2) + "\n";
}

std::string serialize_sweep(std::span<const EvaluationReport> reports,
                            const LabelSet& labels) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& r : reports) cells.push_back(to_json(r, labels));
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json row{{"mean_macro_f1", r.summary.mean},
                       {"std_macro_f1", r.summary.std},
                       {"complete", r.complete},
                       {"fingerprint", r.fingerprint}};
    if (r.cell) {
      row["num_descriptions"] = r.cell->num_descriptions;
      row["aggregation"] = to_string(r.cell->aggregation);
      row["use_context"] = r.cell->use_context;
    }
    summary.push_back(std::move(row));
  }
  return nlohmann::json{{"cells", std::move(cells)},
                        {"summary", std::move(summary)}}
             .dump(2) +
         "\n";
}

std::string report_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "run,macro_f1\n";
  for (const auto& r : report.runs) {
    if (r.complete) out << r.run << ',' << r.macro_f1 << '\n';
  }
  return out.str();
}

}  // namespace zsc
