#pragma once

// Label description templates, paraphrase files, and description pool
// construction.
//
// A template is text with [NAME] placeholders ("This [DOMAIN] leans
// [POLARITY]: "). Each placeholder carries a binding rule: a fixed string, a
// reference to a context attribute, or a value chosen by the label.
// Context-bound placeholders may declare a neutral value used when the
// context is removed (DOMAIN -> "text").

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsc/model.hpp"

namespace zsc {

struct PlaceholderBinding {
  enum class Kind {
    kFixed,      // `value`
    kContext,    // context attribute named `value`
    kLabelName,  // the label's canonical name
    kLabelMap,   // `by_label[label name]`
  };

  Kind kind = Kind::kFixed;
  std::string value;
  std::map<std::string, std::string> by_label;

  static PlaceholderBinding fixed(std::string v) {
    return {Kind::kFixed, std::move(v), {}};
  }
  static PlaceholderBinding context(std::string attribute) {
    return {Kind::kContext, std::move(attribute), {}};
  }
  static PlaceholderBinding label_name() { return {Kind::kLabelName, {}, {}}; }
  static PlaceholderBinding label_map(std::map<std::string, std::string> m) {
    return {Kind::kLabelMap, {}, std::move(m)};
  }

  friend bool operator==(const PlaceholderBinding&,
                         const PlaceholderBinding&) = default;
};

struct DescriptionTemplate {
  LabelId label = 0;
  std::string text;
  std::map<std::string, PlaceholderBinding> bindings;
  // Placeholder -> neutral value, used by strip_context.
  std::map<std::string, std::string> neutral_values;

  // True when any placeholder in `text` is bound to a context attribute.
  bool has_context_placeholders() const;

  friend bool operator==(const DescriptionTemplate&,
                         const DescriptionTemplate&) = default;
};

// Placeholder names in order of first occurrence.
std::vector<std::string> placeholders(std::string_view text);

// Throws TemplateError naming an unresolved placeholder, or on an empty
// expansion.
std::string expand_template(const DescriptionTemplate& t, const Label& label,
                            const ContextAssignment& ctx);

// Substitutes every context-bound placeholder with its neutral value. The
// result never consults a ContextAssignment. Throws TemplateError when a
// context placeholder has no neutral value.
DescriptionTemplate strip_context(const DescriptionTemplate& t);

// Template pack: [{"label": "positive", "template": "...",
//   "bindings": {"DOMAIN": {"context": "domain"}, "POLARITY": {"label": "name"}},
//   "neutral_values": {"DOMAIN": "text"}}, ...]
// Binding forms: {"value": s}, {"context": attr}, {"label": "name"},
// {"label": {label name: s, ...}}.
std::vector<DescriptionTemplate> parse_template_pack(const nlohmann::json& j,
                                                     const LabelSet& labels);
std::vector<DescriptionTemplate> load_template_pack(
    const std::filesystem::path& path, const LabelSet& labels);

// {label name: {context fingerprint: [paraphrase, ...]}}
struct ParaphraseFile {
  std::map<std::pair<LabelId, std::string>, std::vector<std::string>> entries;

  const std::vector<std::string>* find(LabelId label,
                                       const std::string& context_fp) const;
};

ParaphraseFile parse_paraphrases(const nlohmann::json& j,
                                 const LabelSet& labels);
ParaphraseFile load_paraphrases(const std::filesystem::path& path,
                                const LabelSet& labels);

struct PoolOptions {
  bool use_context = true;
  bool include_template = true;
};

// Distinct context assignments the dataset needs pool entries for, in first
// occurrence order. Collapses to the single empty assignment when context is
// off.
std::vector<ContextAssignment> required_contexts(std::span<const Example> data,
                                                 bool use_context);

// One entry per (label, context): template expansions first, then
// paraphrases in file order; exact duplicates dropped keeping the first.
// With use_context off, templates are stripped and paraphrases are looked up
// under the empty context's fingerprint. Throws DataError naming any
// (label, context) pair left without descriptions.
DescriptionPool build_pool(std::span<const DescriptionTemplate> templates,
                           const ParaphraseFile* paraphrases,
                           const LabelSet& labels,
                           std::span<const ContextAssignment> contexts,
                           const PoolOptions& options = {});

}  // namespace zsc
