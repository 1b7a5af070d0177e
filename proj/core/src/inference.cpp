#include "zsc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "zsc/errors.hpp"
#include "zsc/logspace.hpp"

namespace zsc {

namespace {

std::vector<double> totals_of(Scorer& scorer,
                              const std::vector<ScoreQuery>& queries) {
  std::vector<ScoreRecord> records;
  try {
    records = scorer.score_batch(queries);
  } catch (const ScorerError&) {
    // Re-issue one at a time so the failing description can be named.
    for (std::size_t i = 0; i < queries.size(); ++i) {
      try {
        scorer.score(queries[i]);
      } catch (const ScorerError& e) {
        throw ScorerError(e.kind(), "description " + std::to_string(i) + ": " +
                                        e.what());
      }
    }
    throw;
  }
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.total_logprob);
  return out;
}

std::string with_space(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 1);
  out.push_back(' ');
  out.append(s);
  return out;
}

// Contexts whose pool entries a prediction reads, sorted by fingerprint and
// deduplicated.
std::vector<ContextAssignment> prediction_contexts(const Example& x,
                                                   bool use_context) {
  if (!use_context) return {ContextAssignment{}};
  std::map<std::string, ContextAssignment> by_fp;
  for (const auto& c : x.contexts) by_fp.emplace(c.fingerprint(), c);
  std::vector<ContextAssignment> out;
  for (auto& [fp, c] : by_fp) out.push_back(std::move(c));
  return out;
}

}  // namespace

nlohmann::json to_json(const ModeSpec& mode) {
  return {{"mode", to_string(mode.mode)},
          {"framing", mode.mode == Mode::kGenerative
                          ? std::string("ignored")
                          : std::string(to_string(mode.framing))},
          {"use_context", mode.use_context},
          {"aggregation", to_string(mode.aggregation)}};
}

std::string label_name_list(const LabelSet& labels) {
  std::vector<std::string> names;
  for (const auto& l : labels) names.push_back(l.name);
  if (names.size() == 1) return names[0];
  if (names.size() == 2) return names[0] + " or " + names[1];
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i + 1 == names.size()) {
      out += "or " + names[i];
    } else {
      out += names[i] + ", ";
    }
  }
  return out;
}

std::string frame_input(const Example& x, Framing framing,
                        const LabelSet& labels) {
  if (framing == Framing::kNone) return x.text;
  auto domain = x.context().get("domain");
  if (!domain) {
    throw ConfigError(std::string("framing '") +
                      std::string(to_string(framing)) +
                      "' needs a 'domain' context attribute");
  }
  if (framing == Framing::kContext)
    return "This is a " + std::string(*domain) + ". " + x.text;
  return "Is this " + std::string(*domain) + " " + label_name_list(labels) +
         "? " + x.text;
}

std::vector<double> score_generative(std::string_view text,
                                     std::span<const std::string> descs,
                                     Scorer& scorer,
                                     std::string_view model_id,
                                     std::string_view demo_prefix) {
  const std::string continuation = with_space(text);
  std::vector<ScoreQuery> queries;
  queries.reserve(descs.size());
  for (const auto& d : descs) {
    ScoreQuery q;
    q.model_id = model_id;
    q.prefix = std::string(demo_prefix) + d;
    q.continuation = continuation;
    queries.push_back(std::move(q));
  }
  return totals_of(scorer, queries);
}

std::vector<double> score_discriminative(const Example& x,
                                         std::span<const std::string> descs,
                                         Framing framing,
                                         const LabelSet& labels,
                                         Scorer& scorer,
                                         std::string_view model_id,
                                         std::string_view demo_prefix) {
  const std::string prefix =
      std::string(demo_prefix) + frame_input(x, framing, labels);
  std::vector<ScoreQuery> queries;
  queries.reserve(descs.size());
  for (const auto& d : descs) {
    ScoreQuery q;
    q.model_id = model_id;
    q.prefix = prefix;
    q.continuation = with_space(d);
    queries.push_back(std::move(q));
  }
  return totals_of(scorer, queries);
}

std::vector<double> score_pmi(const Example& x,
                              std::span<const std::string> descs,
                              Framing framing, const LabelSet& labels,
                              Scorer& scorer, std::string_view model_id,
                              std::string_view demo_prefix) {
  std::vector<double> conditional = score_discriminative(
      x, descs, framing, labels, scorer, model_id, demo_prefix);
  std::vector<ScoreQuery> queries;
  queries.reserve(descs.size());
  for (const auto& d : descs) {
    ScoreQuery q;
    q.model_id = model_id;
    q.continuation = with_space(d);
    q.null_prefix = true;
    queries.push_back(std::move(q));
  }
  const std::vector<double> null_scores = totals_of(scorer, queries);
  for (std::size_t i = 0; i < conditional.size(); ++i)
    conditional[i] -= null_scores[i];
  return conditional;
}

void resolve_argmax(Prediction& p) {
  if (p.scores.empty()) throw ConfigError("prediction has no labels");
  double max = p.scores[0];
  LabelId arg = 0;
  for (std::size_t i = 1; i < p.scores.size(); ++i) {
    if (p.scores[i] > max) {
      max = p.scores[i];
      arg = static_cast<LabelId>(i);
    }
  }
  std::size_t near = 0;
  for (double s : p.scores) {
    if (s == max || max - s <= kTieTolerance) ++near;
  }
  p.argmax = arg;
  p.tie = near >= 2;
}

Prediction predict(const Example& x, const DescriptionPool& pool,
                   const LabelSet& labels, const ModeSpec& mode,
                   const PredictOptions& options, Scorer& scorer) {
  if (!options.log_priors.empty() && options.log_priors.size() != labels.size())
    throw ConfigError("log_priors must have one entry per label");
  const auto contexts = prediction_contexts(x, mode.use_context);

  Prediction p;
  p.mode = mode;
  p.log_priors = options.log_priors;
  p.icl_format_version = options.demo_prefix.empty() ? 0 : kIclFormatVersion;
  p.scores.resize(labels.size());
  p.provenance.resize(labels.size());

  for (const auto& label : labels) {
    std::vector<double> pooled;
    for (const auto& ctx : contexts) {
      const auto& entry = pool.at(label.id, ctx);
      DescriptionGroup group;
      group.context_fp = ctx.fingerprint();
      group.indices =
          subsample_descriptions(entry.descriptions.size(),
                                 options.num_descriptions, options.sample,
                                 label.id, group.context_fp);
      std::vector<std::string> descs;
      descs.reserve(group.indices.size());
      for (std::size_t i : group.indices) descs.push_back(entry.descriptions[i]);

      try {
        switch (mode.mode) {
          case Mode::kGenerative:
            group.scores = score_generative(x.text, descs, scorer,
                                            options.model_id,
                                            options.demo_prefix);
            break;
          case Mode::kDiscriminative:
            group.scores = score_discriminative(x, descs, mode.framing, labels,
                                                scorer, options.model_id,
                                                options.demo_prefix);
            break;
          case Mode::kDiscriminativePmi:
            group.scores = score_pmi(x, descs, mode.framing, labels, scorer,
                                     options.model_id, options.demo_prefix);
            break;
        }
      } catch (const ScorerError& e) {
        throw ScorerError(e.kind(), "label '" + label.name + "', " + e.what());
      }
      pooled.insert(pooled.end(), group.scores.begin(), group.scores.end());
      p.provenance[static_cast<std::size_t>(label.id)].push_back(
          std::move(group));
    }
    double score = aggregate(pooled, mode.aggregation);
    if (!options.log_priors.empty())
      score += options.log_priors[static_cast<std::size_t>(label.id)];
    p.scores[static_cast<std::size_t>(label.id)] = score;
  }
  resolve_argmax(p);
  return p;
}

nlohmann::json to_json(const Prediction& p, const LabelSet& labels) {
  nlohmann::json provenance = nlohmann::json::array();
  for (std::size_t l = 0; l < p.provenance.size(); ++l) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : p.provenance[l]) {
      groups.push_back({{"context_fp", g.context_fp},
                        {"indices", g.indices},
                        {"scores", g.scores}});
    }
    provenance.push_back(std::move(groups));
  }
  nlohmann::json j{{"scores", p.scores},
                   {"argmax", p.argmax},
                   {"label", labels.at(p.argmax).name},
                   {"tie", p.tie},
                   {"mode", to_json(p.mode)},
                   {"provenance", std::move(provenance)},
                   {"icl_format_version", p.icl_format_version}};
  if (!p.log_priors.empty()) j["log_priors"] = p.log_priors;
  return j;
}

IclPrompt build_icl_prompt(std::span<const Example> demos, const Example& x,
                           const DescriptionPool& pool, const ModeSpec& mode,
                           std::uint64_t seed) {
  IclPrompt prompt;
  prompt.test_text = x.text;
  const auto order =
      sample_order(demos.size(), demos.size(), derive_key(seed, "icl-order"));
  for (std::size_t i : order) {
    const Example& demo = demos[i];
    if (!demo.gold) {
      throw ConfigError("demonstration " + std::to_string(i) +
                        " has no gold label");
    }
    ContextAssignment ctx;
    if (mode.use_context) ctx = demo.context().empty() ? x.context() : demo.context();
    const auto& entry = pool.at(*demo.gold, ctx);
    Demonstration d{demo.text, entry.descriptions.front(), *demo.gold};
    if (mode.mode == Mode::kGenerative) {
      prompt.rendered += d.description + " " + d.text + "\n\n";
    } else {
      prompt.rendered += d.text + " " + d.description + "\n\n";
    }
    prompt.demos.push_back(std::move(d));
  }
  return prompt;
}

std::vector<Example> build_zicl_demos(std::span<const std::string> corpus,
                                      std::size_t k, const LabelSet& labels,
                                      std::uint64_t seed) {
  if (corpus.size() < k) {
    throw ConfigError("Z-ICL corpus has " + std::to_string(corpus.size()) +
                      " texts, need " + std::to_string(k));
  }
  if (k > 0 && labels.empty()) throw ConfigError("Z-ICL needs labels");
  const auto picks = sample_order(corpus.size(), k, derive_key(seed, "zicl-text"));
  KeyedStream label_stream(derive_key(seed, "zicl-label"));
  std::vector<Example> out;
  out.reserve(k);
  for (std::size_t i : picks) {
    Example ex;
    ex.text = corpus[i];
    ex.gold = static_cast<LabelId>(label_stream.uniform(labels.size()));
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace zsc
