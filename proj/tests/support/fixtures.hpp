#pragma once

// Small synthetic tasks for unit, property and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "zsc/model.hpp"
#include "zsc/templating.hpp"

namespace zsc::testing {

inline TaskManifest sentiment_manifest() {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(R"({
    "labels": ["positive", "negative"],
    "context_schema": {"domain": ["movie review", "tweet"]}
  })");
  return parse_manifest(j);
}

inline DescriptionTemplate sentiment_template(LabelId label) {
  DescriptionTemplate t;
  t.label = label;
  t.text = "This [DOMAIN] leans [POLARITY]: ";
  t.bindings["DOMAIN"] = PlaceholderBinding::context("domain");
  t.bindings["POLARITY"] = PlaceholderBinding::label_name();
  t.neutral_values["DOMAIN"] = "text";
  return t;
}

inline std::string random_word(std::mt19937_64& rng, std::size_t min_len = 2,
                               std::size_t max_len = 8) {
  static constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> letter(0, 25);
  std::string w(len(rng), 'a');
  for (auto& c : w) c = kLetters[letter(rng)];
  return w;
}

inline std::string random_sentence(std::mt19937_64& rng, std::size_t words) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += random_word(rng);
  }
  return s;
}

struct SyntheticTask {
  LabelSet labels;
  std::vector<Example> examples;
  DescriptionPool pool;
  std::vector<ContextAssignment> contexts;
};

// K labels, `domains` context values, m distinct descriptions per
// (label, domain) entry, `count` gold-labelled examples. When
// `multi_context` is set, some examples carry two assignments.
inline SyntheticTask random_task(std::uint64_t seed, std::size_t k,
                                 std::size_t m, std::size_t count,
                                 std::size_t domains = 2,
                                 bool multi_context = false) {
  std::mt19937_64 rng(seed);
  SyntheticTask task;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i)
    names.push_back("label" + std::to_string(i) + random_word(rng, 1, 3));
  task.labels = LabelSet(names);

  for (std::size_t d = 0; d < domains; ++d) {
    task.contexts.emplace_back(std::map<std::string, std::string>{
        {"domain", "domain" + std::to_string(d) + " " + random_word(rng)}});
  }
  // The empty context serves runs with use_context off.
  std::vector<ContextAssignment> pool_contexts = task.contexts;
  pool_contexts.emplace_back();
  for (const auto& label : task.labels) {
    for (const auto& ctx : pool_contexts) {
      const std::string domain =
          ctx.empty() ? std::string("text") : std::string(*ctx.get("domain"));
      std::vector<std::string> descs;
      while (descs.size() < m) {
        std::string d = "This " + domain + " is " +
                        random_sentence(rng, 1 + descs.size() % 3) + ": ";
        if (std::find(descs.begin(), descs.end(), d) == descs.end())
          descs.push_back(std::move(d));
      }
      task.pool.add(label.id, ctx, std::move(descs));
    }
  }

  std::uniform_int_distribution<std::size_t> pick_label(0, k - 1);
  std::uniform_int_distribution<std::size_t> pick_ctx(0, domains - 1);
  std::uniform_int_distribution<int> coin(0, 3);
  for (std::size_t i = 0; i < count; ++i) {
    Example ex;
    ex.text = random_sentence(rng, 2 + i % 4);
    ex.gold = static_cast<LabelId>(pick_label(rng));
    ex.contexts = {task.contexts[pick_ctx(rng)]};
    if (multi_context && domains > 1 && coin(rng) == 0) {
      ex.contexts.push_back(task.contexts[pick_ctx(rng)]);
    }
    task.examples.push_back(std::move(ex));
  }
  return task;
}

}  // namespace zsc::testing
