#pragma once

// Task and data model shared by every other part of the library: labels,
// context schemas, examples, description pools and run configuration.
// All values are immutable once constructed and may be shared across threads.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace zsc {

using LabelId = int;

struct Label {
  LabelId id = 0;
  std::string name;
};

// Dense, ordered set of labels. Ids are 0..K-1 in declaration order.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(const std::vector<std::string>& names);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const Label& at(LabelId id) const;
  std::optional<LabelId> find(std::string_view name) const;
  bool contains(LabelId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < labels_.size();
  }

  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

  friend bool operator==(const LabelSet& a, const LabelSet& b);

 private:
  std::vector<Label> labels_;
};

// Context attribute bindings (the observed values of the non-textual
// factors). Empty means the "no context" condition.
class ContextAssignment {
 public:
  ContextAssignment() = default;
  explicit ContextAssignment(std::map<std::string, std::string> bindings)
      : bindings_(std::move(bindings)) {}
  ContextAssignment(
      std::initializer_list<std::pair<const std::string, std::string>> pairs)
      : bindings_(pairs) {}

  bool empty() const { return bindings_.empty(); }
  const std::map<std::string, std::string>& bindings() const {
    return bindings_;
  }
  std::optional<std::string_view> get(std::string_view name) const;

  // Order-independent: names sorted, each joined to its value by US (0x1f),
  // pairs joined by RS (0x1e).
  std::string canonical() const;
  // 16 hex digits; FNV-1a of canonical().
  std::string fingerprint() const;

  nlohmann::json to_json() const;

  friend bool operator==(const ContextAssignment&,
                         const ContextAssignment&) = default;

 private:
  std::map<std::string, std::string> bindings_;
};

struct ContextAttribute {
  std::string name;
  // nullopt: free text.
  std::optional<std::vector<std::string>> values;

  friend bool operator==(const ContextAttribute&,
                         const ContextAttribute&) = default;
};

class ContextSchema {
 public:
  ContextSchema() = default;
  explicit ContextSchema(std::vector<ContextAttribute> attributes);

  const std::vector<ContextAttribute>& attributes() const {
    return attributes_;
  }
  const ContextAttribute* find(std::string_view name) const;

  // Throws DataError naming the offending attribute.
  void validate(const ContextAssignment& ctx) const;

  friend bool operator==(const ContextSchema&, const ContextSchema&) = default;

 private:
  std::vector<ContextAttribute> attributes_;
};

struct TaskManifest {
  LabelSet labels;
  ContextSchema schema;
};

// {"labels": [...], "context_schema": {"domain": ["tweet", ...], "age": "free text"}}
// Attribute order follows the document.
TaskManifest parse_manifest(const nlohmann::ordered_json& j);
TaskManifest load_manifest(const std::filesystem::path& path);

struct Example {
  std::string text;
  std::optional<LabelId> gold;
  // One assignment per reported attribute set; always at least one (possibly
  // empty). More than one appears for personalized data where several
  // annotators judged the same text.
  std::vector<ContextAssignment> contexts{ContextAssignment{}};

  const ContextAssignment& context() const { return contexts.front(); }

  friend bool operator==(const Example&, const Example&) = default;
};

// Parses one JSONL record. `line_no` is 1-based and used in messages.
Example parse_example(std::string_view line, std::size_t line_no,
                      const TaskManifest& manifest);
std::vector<Example> load_dataset(const std::filesystem::path& path,
                                  const TaskManifest& manifest);
std::vector<Example> read_dataset(std::istream& in,
                                  const TaskManifest& manifest);

nlohmann::json example_to_json(const Example& ex, const LabelSet& labels);
void write_dataset(std::ostream& out, std::span<const Example> examples,
                   const LabelSet& labels);

// Ordered description lists keyed by (label id, context fingerprint).
class DescriptionPool {
 public:
  struct Key {
    LabelId label = 0;
    std::string context_fp;

    auto operator<=>(const Key&) const = default;
  };

  struct Entry {
    ContextAssignment context;
    std::vector<std::string> descriptions;
  };

  // Throws DataError on empty lists, empty strings or duplicates.
  void add(LabelId label, const ContextAssignment& ctx,
           std::vector<std::string> descriptions);

  const Entry* find(LabelId label, std::string_view context_fp) const;
  // Throws DataError naming (label, context) when absent.
  const Entry& at(LabelId label, const ContextAssignment& ctx) const;

  const std::map<Key, Entry>& entries() const { return entries_; }
  std::size_t min_entry_size() const;
  bool empty() const { return entries_.empty(); }

  nlohmann::json to_json() const;

 private:
  std::map<Key, Entry> entries_;
};

enum class Mode { kGenerative, kDiscriminative, kDiscriminativePmi };
enum class Framing { kNone, kContext, kInstruct };
enum class Aggregation { kArithmetic, kGeometric, kHarmonic };

std::string_view to_string(Mode mode);
std::string_view to_string(Framing framing);
std::string_view to_string(Aggregation aggregation);
// Throw ConfigError on unknown names.
Mode parse_mode(std::string_view name);
Framing parse_framing(std::string_view name);
Aggregation parse_aggregation(std::string_view name);

struct ZiclConfig {
  std::string corpus_path;
  std::size_t k = 0;

  friend bool operator==(const ZiclConfig&, const ZiclConfig&) = default;
};

struct RunConfig {
  Mode mode = Mode::kGenerative;
  Framing framing = Framing::kNone;  // discriminative modes only
  bool use_context = true;
  std::size_t num_descriptions = 1;
  Aggregation aggregation = Aggregation::kArithmetic;
  std::size_t num_runs = 1;
  std::uint64_t base_seed = 0;
  std::size_t shots = 0;
  std::optional<ZiclConfig> zicl;
  // Keep the hand-written template expansion in the pool at index 0.
  bool include_template = true;

  bool framing_applies() const { return mode != Mode::kGenerative; }

  // Throws ConfigError when the configuration cannot run against `pool`.
  void validate(const DescriptionPool& pool) const;

  // Every field, with framing reported as ignored in generative mode.
  nlohmann::json to_json() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// SHA-256 over a canonical encoding of every prediction-relevant field.
// `extra` folds in inputs outside (config, pool), e.g. demonstration data.
std::string fingerprint_config(const RunConfig& config,
                               const DescriptionPool& pool,
                               std::string_view model_id,
                               std::string_view extra = {});

}  // namespace zsc
