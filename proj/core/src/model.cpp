#include "zsc/model.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "zsc/errors.hpp"
#include "zsc/hashing.hpp"

namespace zsc {

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  });
}

std::string at_line(std::size_t line_no) {
  return " at line " + std::to_string(line_no);
}

// Context values may be written as JSON numbers (e.g. an age); they are bound
// as their textual form.
std::string context_value(const nlohmann::json& v, const std::string& name,
                          std::size_t line_no) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned() || v.is_boolean())
    return v.dump();
  throw DataError("context attribute '" + name + "' must be a string" +
                  at_line(line_no));
}

ContextAssignment parse_context(const nlohmann::json& obj,
                                const ContextSchema& schema,
                                std::size_t line_no) {
  if (!obj.is_object())
    throw DataError("context must be an object" + at_line(line_no));
  std::map<std::string, std::string> bindings;
  for (const auto& [name, value] : obj.items()) {
    bindings.emplace(name, context_value(value, name, line_no));
  }
  ContextAssignment ctx(std::move(bindings));
  try {
    schema.validate(ctx);
  } catch (const DataError& e) {
    throw DataError(std::string(e.what()) + at_line(line_no));
  }
  return ctx;
}

}  // namespace

// ---------------------------------------------------------------------------
// LabelSet

LabelSet::LabelSet(const std::vector<std::string>& names) {
  std::set<std::string_view> seen;
  labels_.reserve(names.size());
  for (const auto& name : names) {
    if (name.empty()) throw DataError("label name must be non-empty");
    if (!seen.insert(name).second)
      throw DataError("duplicate label name '" + name + "'");
    labels_.push_back(Label{static_cast<LabelId>(labels_.size()), name});
  }
}

const Label& LabelSet::at(LabelId id) const {
  if (!contains(id))
    throw DataError("label id " + std::to_string(id) + " out of range");
  return labels_[static_cast<std::size_t>(id)];
}

std::optional<LabelId> LabelSet::find(std::string_view name) const {
  for (const auto& label : labels_) {
    if (label.name == name) return label.id;
  }
  return std::nullopt;
}

bool operator==(const LabelSet& a, const LabelSet& b) {
  return std::equal(a.labels_.begin(), a.labels_.end(), b.labels_.begin(),
                    b.labels_.end(), [](const Label& x, const Label& y) {
                      return x.id == y.id && x.name == y.name;
                    });
}

// ---------------------------------------------------------------------------
// ContextAssignment / ContextSchema

std::optional<std::string_view> ContextAssignment::get(
    std::string_view name) const {
  auto it = bindings_.find(std::string(name));
  if (it == bindings_.end()) return std::nullopt;
  return std::string_view(it->second);
}

std::string ContextAssignment::canonical() const {
  // std::map iterates in lexicographic key order.
  std::string out;
  bool first = true;
  for (const auto& [name, value] : bindings_) {
    if (!first) out.push_back('\x1e');
    first = false;
    out += name;
    out.push_back('\x1f');
    out += value;
  }
  return out;
}

std::string ContextAssignment::fingerprint() const {
  return hex64(fnv1a64(canonical()));
}

nlohmann::json ContextAssignment::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : bindings_) j[name] = value;
  return j;
}

ContextSchema::ContextSchema(std::vector<ContextAttribute> attributes)
    : attributes_(std::move(attributes)) {
  std::set<std::string_view> seen;
  for (const auto& attr : attributes_) {
    if (attr.name.empty())
      throw DataError("context attribute name must be non-empty");
    if (!seen.insert(attr.name).second)
      throw DataError("duplicate context attribute '" + attr.name + "'");
  }
}

const ContextAttribute* ContextSchema::find(std::string_view name) const {
  for (const auto& attr : attributes_) {
    if (attr.name == name) return &attr;
  }
  return nullptr;
}

void ContextSchema::validate(const ContextAssignment& ctx) const {
  for (const auto& [name, value] : ctx.bindings()) {
    const ContextAttribute* attr = find(name);
    if (attr == nullptr)
      throw DataError("schema violation: unknown context attribute '" + name +
                      "'");
    if (attr->values &&
        std::find(attr->values->begin(), attr->values->end(), value) ==
            attr->values->end()) {
      throw DataError("schema violation: value '" + value +
                      "' not in domain of attribute '" + name + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Manifest

TaskManifest parse_manifest(const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array())
    throw DataError("manifest: 'labels' array is required");
  std::vector<std::string> names;
  for (const auto& v : j["labels"]) {
    if (!v.is_string()) throw DataError("manifest: label names must be strings");
    names.push_back(v.get<std::string>());
  }
  if (names.empty()) throw DataError("manifest: at least one label required");

  std::vector<ContextAttribute> attrs;
  if (j.contains("context_schema")) {
    const auto& schema = j["context_schema"];
    if (!schema.is_object())
      throw DataError("manifest: 'context_schema' must be an object");
    for (const auto& [name, domain] : schema.items()) {
      ContextAttribute attr{name, std::nullopt};
      if (domain.is_array()) {
        std::vector<std::string> values;
        for (const auto& v : domain) {
          if (!v.is_string())
            throw DataError("manifest: domain of '" + name +
                            "' must list strings");
          values.push_back(v.get<std::string>());
        }
        attr.values = std::move(values);
      } else if (!(domain.is_string() && domain.get<std::string>() == "free text")) {
        throw DataError("manifest: domain of '" + name +
                        "' must be a string array or \"free text\"");
      }
      attrs.push_back(std::move(attr));
    }
  }
  return TaskManifest{LabelSet(names), ContextSchema(std::move(attrs))};
}

TaskManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  return parse_manifest(j);
}

// ---------------------------------------------------------------------------
// Dataset

Example parse_example(std::string_view line, std::size_t line_no,
                      const TaskManifest& manifest) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw DataError("malformed record" + at_line(line_no));
  }
  if (!j.is_object()) throw DataError("malformed record" + at_line(line_no));

  Example ex;
  auto text = j.find("text");
  if (text == j.end() || !text->is_string())
    throw DataError("missing string field 'text'" + at_line(line_no));
  ex.text = text->get<std::string>();
  if (is_blank(ex.text)) throw DataError("empty input text" + at_line(line_no));

  if (auto label = j.find("label"); label != j.end() && !label->is_null()) {
    if (!label->is_string())
      throw DataError("field 'label' must be a string" + at_line(line_no));
    auto id = manifest.labels.find(label->get<std::string>());
    if (!id)
      throw DataError("unknown label '" + label->get<std::string>() + "'" +
                      at_line(line_no));
    ex.gold = *id;
  }

  if (auto ctx = j.find("context"); ctx != j.end() && !ctx->is_null()) {
    ex.contexts.clear();
    if (ctx->is_array()) {
      for (const auto& obj : *ctx)
        ex.contexts.push_back(parse_context(obj, manifest.schema, line_no));
      if (ex.contexts.empty()) ex.contexts.emplace_back();
    } else {
      ex.contexts.push_back(parse_context(*ctx, manifest.schema, line_no));
    }
  }
  return ex;
}

std::vector<Example> read_dataset(std::istream& in,
                                  const TaskManifest& manifest) {
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    out.push_back(parse_example(line, line_no, manifest));
  }
  return out;
}

std::vector<Example> load_dataset(const std::filesystem::path& path,
                                  const TaskManifest& manifest) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  try {
    return read_dataset(in, manifest);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

nlohmann::json example_to_json(const Example& ex, const LabelSet& labels) {
  nlohmann::json j;
  j["text"] = ex.text;
  if (ex.gold) j["label"] = labels.at(*ex.gold).name;
  if (ex.contexts.size() == 1) {
    j["context"] = ex.contexts.front().to_json();
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : ex.contexts) arr.push_back(c.to_json());
    j["context"] = std::move(arr);
  }
  return j;
}

void write_dataset(std::ostream& out, std::span<const Example> examples,
                   const LabelSet& labels) {
  for (const auto& ex : examples) out << example_to_json(ex, labels).dump() << '\n';
}

// ---------------------------------------------------------------------------
// DescriptionPool

void DescriptionPool::add(LabelId label, const ContextAssignment& ctx,
                          std::vector<std::string> descriptions) {
  std::string where = "label " + std::to_string(label) + ", context '" +
                      ctx.fingerprint() + "'";
  if (descriptions.empty())
    throw DataError("description pool entry (" + where + ") is empty");
  std::set<std::string_view> seen;
  for (const auto& d : descriptions) {
    if (d.empty())
      throw DataError("empty description string in pool entry (" + where + ")");
    if (!seen.insert(d).second)
      throw DataError("duplicate description '" + d + "' in pool entry (" +
                      where + ")");
  }
  Key key{label, ctx.fingerprint()};
  if (entries_.count(key))
    throw DataError("pool entry (" + where + ") defined twice");
  entries_.emplace(std::move(key), Entry{ctx, std::move(descriptions)});
}

const DescriptionPool::Entry* DescriptionPool::find(
    LabelId label, std::string_view context_fp) const {
  auto it = entries_.find(Key{label, std::string(context_fp)});
  return it == entries_.end() ? nullptr : &it->second;
}

const DescriptionPool::Entry& DescriptionPool::at(
    LabelId label, const ContextAssignment& ctx) const {
  const Entry* entry = find(label, ctx.fingerprint());
  if (entry == nullptr) {
    throw DataError("description pool has no entry for (label " +
                    std::to_string(label) + ", context " +
                    ctx.to_json().dump() + ")");
  }
  return *entry;
}

std::size_t DescriptionPool::min_entry_size() const {
  std::size_t m = 0;
  bool first = true;
  for (const auto& [key, entry] : entries_) {
    if (first || entry.descriptions.size() < m) m = entry.descriptions.size();
    first = false;
  }
  return m;
}

nlohmann::json DescriptionPool::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [key, entry] : entries_) {
    arr.push_back({{"label", key.label},
                   {"context_fp", key.context_fp},
                   {"context", entry.context.to_json()},
                   {"descriptions", entry.descriptions}});
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Enums

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kGenerative: return "generative";
    case Mode::kDiscriminative: return "discriminative";
    case Mode::kDiscriminativePmi: return "discriminative-pmi";
  }
  return "?";
}

std::string_view to_string(Framing framing) {
  switch (framing) {
    case Framing::kNone: return "none";
    case Framing::kContext: return "context";
    case Framing::kInstruct: return "instruct";
  }
  return "?";
}

std::string_view to_string(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::kArithmetic: return "arithmetic";
    case Aggregation::kGeometric: return "geometric";
    case Aggregation::kHarmonic: return "harmonic";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::kGenerative, Mode::kDiscriminative, Mode::kDiscriminativePmi})
    if (to_string(m) == name) return m;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

Framing parse_framing(std::string_view name) {
  for (Framing f : {Framing::kNone, Framing::kContext, Framing::kInstruct})
    if (to_string(f) == name) return f;
  throw ConfigError("unknown framing '" + std::string(name) + "'");
}

Aggregation parse_aggregation(std::string_view name) {
  for (Aggregation a : {Aggregation::kArithmetic, Aggregation::kGeometric,
                        Aggregation::kHarmonic})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown aggregation '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::validate(const DescriptionPool& pool) const {
  if (num_descriptions < 1) throw ConfigError("num_descriptions must be >= 1");
  if (num_runs < 1) throw ConfigError("num_runs must be >= 1");
  if (pool.empty()) throw ConfigError("description pool is empty");
  for (const auto& [key, entry] : pool.entries()) {
    if (num_descriptions > entry.descriptions.size()) {
      throw ConfigError(
          "num_descriptions " + std::to_string(num_descriptions) +
          " exceeds pool entry (label " + std::to_string(key.label) +
          ", context " + entry.context.to_json().dump() + ") of size " +
          std::to_string(entry.descriptions.size()));
    }
  }
  if (zicl && shots > 0)
    throw ConfigError("shots and zicl are mutually exclusive");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = to_string(mode);
  j["framing"] = to_string(framing);
  j["framing_ignored"] = !framing_applies();
  j["use_context"] = use_context;
  j["num_descriptions"] = num_descriptions;
  j["aggregation"] = to_string(aggregation);
  j["num_runs"] = num_runs;
  j["base_seed"] = base_seed;
  j["shots"] = shots;
  if (zicl) {
    j["zicl"] = {{"corpus_path", zicl->corpus_path}, {"k", zicl->k}};
  } else {
    j["zicl"] = nullptr;
  }
  j["include_template"] = include_template;
  return j;
}

std::string fingerprint_config(const RunConfig& config,
                               const DescriptionPool& pool,
                               std::string_view model_id,
                               std::string_view extra) {
  nlohmann::json cfg = config.to_json();
  // Framing cannot change generative predictions, so it is not allowed to
  // change the digest either.
  if (!config.framing_applies()) cfg["framing"] = to_string(Framing::kNone);
  // The corpus path is only a locator; its contents arrive through `extra`.
  if (config.zicl) cfg["zicl"].erase("corpus_path");
  nlohmann::json doc;
  doc["format"] = 1;
  doc["config"] = std::move(cfg);
  doc["pool"] = pool.to_json();
  doc["model_id"] = model_id;
  doc["extra"] = extra;
  return sha256_hex(doc.dump());
}

}  // namespace zsc
