#include "zsc/templating.hpp"

#include <fstream>
#include <set>

#include "zsc/errors.hpp"

namespace zsc {

namespace {

struct PlaceholderSpan {
  std::size_t begin;  // position of '['
  std::size_t end;    // one past ']'
  std::string name;
};

bool is_name_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == ' ';
}

// Placeholders are upper-case names in square brackets; names may contain
// spaces ("[LIST OF LABEL NAMES]") but must start with a letter.
std::vector<PlaceholderSpan> scan(std::string_view text) {
  std::vector<PlaceholderSpan> out;
  std::size_t pos = 0;
  while ((pos = text.find('[', pos)) != std::string_view::npos) {
    std::size_t close = text.find(']', pos + 1);
    if (close == std::string_view::npos) break;
    std::string_view name = text.substr(pos + 1, close - pos - 1);
    bool valid = !name.empty() && name.front() >= 'A' && name.front() <= 'Z' &&
                 name.back() != ' ';
    for (char c : name) valid = valid && is_name_char(c);
    if (valid) {
      out.push_back({pos, close + 1, std::string(name)});
      pos = close + 1;
    } else {
      pos = pos + 1;
    }
  }
  return out;
}

std::string resolve(const DescriptionTemplate& t, const std::string& name,
                    const Label& label, const ContextAssignment& ctx) {
  auto it = t.bindings.find(name);
  if (it == t.bindings.end())
    throw TemplateError("unresolved placeholder [" + name +
                        "]: no binding rule");
  const PlaceholderBinding& b = it->second;
  switch (b.kind) {
    case PlaceholderBinding::Kind::kFixed:
      return b.value;
    case PlaceholderBinding::Kind::kContext: {
      auto value = ctx.get(b.value);
      if (!value)
        throw TemplateError("unresolved placeholder [" + name +
                            "]: context lacks attribute '" + b.value + "'");
      return std::string(*value);
    }
    case PlaceholderBinding::Kind::kLabelName:
      return label.name;
    case PlaceholderBinding::Kind::kLabelMap: {
      auto v = b.by_label.find(label.name);
      if (v == b.by_label.end())
        throw TemplateError("unresolved placeholder [" + name +
                            "]: no value for label '" + label.name + "'");
      return v->second;
    }
  }
  throw TemplateError("unresolved placeholder [" + name + "]");
}

PlaceholderBinding parse_binding(const std::string& name,
                                 const nlohmann::json& j) {
  if (!j.is_object() || j.size() != 1)
    throw DataError("binding for [" + name + "] must be a one-key object");
  if (j.contains("value") && j["value"].is_string())
    return PlaceholderBinding::fixed(j["value"].get<std::string>());
  if (j.contains("context") && j["context"].is_string())
    return PlaceholderBinding::context(j["context"].get<std::string>());
  if (j.contains("label")) {
    const auto& l = j["label"];
    if (l.is_string() && l.get<std::string>() == "name")
      return PlaceholderBinding::label_name();
    if (l.is_object())
      return PlaceholderBinding::label_map(
          l.get<std::map<std::string, std::string>>());
  }
  throw DataError("unrecognised binding for [" + name + "]: " + j.dump());
}

nlohmann::json read_json(const std::filesystem::path& path,
                         std::string_view what) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open " + std::string(what) + " " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string(what) + " " + path.string() + ": " + e.what());
  }
}

}  // namespace

bool DescriptionTemplate::has_context_placeholders() const {
  for (const auto& p : scan(text)) {
    auto it = bindings.find(p.name);
    if (it != bindings.end() &&
        it->second.kind == PlaceholderBinding::Kind::kContext)
      return true;
  }
  return false;
}

std::vector<std::string> placeholders(std::string_view text) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& p : scan(text)) {
    if (seen.insert(p.name).second) out.push_back(std::move(p.name));
  }
  return out;
}

std::string expand_template(const DescriptionTemplate& t, const Label& label,
                            const ContextAssignment& ctx) {
  std::string out;
  std::size_t cursor = 0;
  for (const auto& p : scan(t.text)) {
    out.append(t.text, cursor, p.begin - cursor);
    out += resolve(t, p.name, label, ctx);
    cursor = p.end;
  }
  out.append(t.text, cursor, std::string::npos);
  if (out.empty() ||
      out.find_first_not_of(" \t\n\r") == std::string::npos)
    throw TemplateError("template for label '" + label.name +
                        "' expands to an empty description");
  return out;
}

DescriptionTemplate strip_context(const DescriptionTemplate& t) {
  DescriptionTemplate out = t;
  out.text.clear();
  std::size_t cursor = 0;
  for (const auto& p : scan(t.text)) {
    auto it = t.bindings.find(p.name);
    if (it == t.bindings.end() ||
        it->second.kind != PlaceholderBinding::Kind::kContext)
      continue;
    auto neutral = t.neutral_values.find(p.name);
    if (neutral == t.neutral_values.end())
      throw TemplateError("context placeholder [" + p.name +
                          "] has no neutral value");
    out.text.append(t.text, cursor, p.begin - cursor);
    out.text += neutral->second;
    cursor = p.end;
  }
  out.text.append(t.text, cursor, std::string::npos);
  std::erase_if(out.bindings, [](const auto& kv) {
    return kv.second.kind == PlaceholderBinding::Kind::kContext;
  });
  return out;
}

std::vector<DescriptionTemplate> parse_template_pack(const nlohmann::json& j,
                                                     const LabelSet& labels) {
  if (!j.is_array()) throw DataError("template pack must be a JSON array");
  std::vector<DescriptionTemplate> out;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("label") ||
        !item.contains("template"))
      throw DataError("template pack entries need 'label' and 'template'");
    const auto name = item["label"].get<std::string>();
    auto id = labels.find(name);
    if (!id) throw DataError("template pack: unknown label '" + name + "'");
    DescriptionTemplate t;
    t.label = *id;
    t.text = item["template"].get<std::string>();
    if (item.contains("bindings")) {
      for (const auto& [ph, b] : item["bindings"].items())
        t.bindings.emplace(ph, parse_binding(ph, b));
    }
    if (item.contains("neutral_values"))
      t.neutral_values =
          item["neutral_values"].get<std::map<std::string, std::string>>();
    for (const auto& ph : placeholders(t.text)) {
      if (!t.bindings.count(ph))
        throw DataError("template '" + t.text + "': placeholder [" + ph +
                        "] has no binding rule");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<DescriptionTemplate> load_template_pack(
    const std::filesystem::path& path, const LabelSet& labels) {
  return parse_template_pack(read_json(path, "template pack"), labels);
}

const std::vector<std::string>* ParaphraseFile::find(
    LabelId label, const std::string& context_fp) const {
  auto it = entries.find({label, context_fp});
  return it == entries.end() ? nullptr : &it->second;
}

ParaphraseFile parse_paraphrases(const nlohmann::json& j,
                                 const LabelSet& labels) {
  if (!j.is_object())
    throw DataError("paraphrase file must be an object keyed by label name");
  ParaphraseFile out;
  for (const auto& [name, by_ctx] : j.items()) {
    auto id = labels.find(name);
    if (!id) throw DataError("paraphrase file: unknown label '" + name + "'");
    if (!by_ctx.is_object())
      throw DataError("paraphrase file: '" + name +
                      "' must map context fingerprints to lists");
    for (const auto& [fp, list] : by_ctx.items()) {
      auto strings = list.get<std::vector<std::string>>();
      if (strings.empty())
        throw DataError("paraphrase file: empty list for (" + name + ", " +
                        fp + ")");
      out.entries[{*id, fp}] = std::move(strings);
    }
  }
  return out;
}

ParaphraseFile load_paraphrases(const std::filesystem::path& path,
                                const LabelSet& labels) {
  return parse_paraphrases(read_json(path, "paraphrase file"), labels);
}

std::vector<ContextAssignment> required_contexts(std::span<const Example> data,
                                                 bool use_context) {
  if (!use_context) return {ContextAssignment{}};
  std::vector<ContextAssignment> out;
  std::set<std::string> seen;
  for (const auto& ex : data) {
    for (const auto& ctx : ex.contexts) {
      if (seen.insert(ctx.fingerprint()).second) out.push_back(ctx);
    }
  }
  return out;
}

DescriptionPool build_pool(std::span<const DescriptionTemplate> templates,
                           const ParaphraseFile* paraphrases,
                           const LabelSet& labels,
                           std::span<const ContextAssignment> contexts,
                           const PoolOptions& options) {
  std::vector<DescriptionTemplate> effective;
  if (options.include_template) {
    effective.reserve(templates.size());
    for (const auto& t : templates)
      effective.push_back(options.use_context ? t : strip_context(t));
  }

  std::vector<ContextAssignment> ctxs;
  if (options.use_context) {
    ctxs.assign(contexts.begin(), contexts.end());
  } else {
    ctxs.emplace_back();
  }

  DescriptionPool pool;
  for (const auto& label : labels) {
    for (const auto& ctx : ctxs) {
      std::vector<std::string> descs;
      std::set<std::string> seen;
      auto push = [&](std::string d) {
        if (seen.insert(d).second) descs.push_back(std::move(d));
      };
      for (const auto& t : effective) {
        if (t.label == label.id) push(expand_template(t, label, ctx));
      }
      if (paraphrases) {
        if (const auto* list = paraphrases->find(label.id, ctx.fingerprint()))
          for (const auto& p : *list) push(p);
      }
      if (descs.empty()) {
        throw DataError("no descriptions for (label '" + label.name +
                        "', context " + ctx.to_json().dump() + " [" +
                        ctx.fingerprint() + "])");
      }
      for (const auto& d : descs) {
        if (!placeholders(d).empty())
          throw DataError("description '" + d +
                          "' contains a residual placeholder");
      }
      pool.add(label.id, ctx, std::move(descs));
    }
  }
  return pool;
}

}  // namespace zsc
