#include "zsc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "zsc/errors.hpp"
#include "zsc/evaluation.hpp"
#include "zsc/hashing.hpp"
#include "zsc/inference.hpp"
#include "zsc/mock_scorer.hpp"
#include "zsc/model.hpp"
#include "zsc/remote_scorer.hpp"
#include "zsc/score_cache.hpp"
#include "zsc/templating.hpp"

namespace zsc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kEndpointEnv = "ZSC_ENDPOINT";

struct Options {
  // Inputs.
  std::string manifest;
  std::string dataset;
  std::string templates;
  std::string paraphrases;
  std::string demos;
  std::string zicl_corpus;
  std::string text;
  std::vector<std::string> context;

  // RunConfig fields.
  std::string mode = "generative";
  std::string framing = "none";
  bool use_context = true;
  std::size_t num_descriptions = 1;
  std::string aggregation = "arithmetic";
  std::size_t num_runs = 1;
  std::uint64_t base_seed = 0;
  std::size_t shots = 0;
  std::size_t zicl_k = 0;
  bool exclude_template = false;
  bool paper_defaults = false;

  // Sweep axes, empty = base value.
  std::string sweep_n;
  std::string sweep_aggregation;
  std::string sweep_context;

  // Backend.
  std::string backend = "mock";
  std::string model;
  std::string endpoint;
  std::size_t timeout_ms = 30000;
  std::size_t max_in_flight = 4;
  std::size_t batch = 8;
  std::string cache;

  // Output.
  std::string report;
  std::string csv;
  std::size_t jobs = 1;
};

// Explicitly given flags, so presets only fill what the user left unset.
struct Given {
  bool mode = false;
  bool use_context = false;
  bool num_descriptions = false;
  bool aggregation = false;
  bool num_runs = false;
  bool sweep_n = false;
};

void require_file(const std::string& path, const char* flag) {
  if (path.empty() || path == "-") return;
  if (!fs::exists(path))
    throw ConfigError(std::string(flag) + ": no such file '" + path + "'");
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_output(const std::string& path, const std::string& content,
                  std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  file << content;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

std::size_t parse_count(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-')
    throw ConfigError("not a count: '" + s + "'");
  return static_cast<std::size_t>(v);
}

// "1..10" or "1,3,5".
std::vector<std::size_t> parse_n_axis(const std::string& spec) {
  std::vector<std::size_t> out;
  if (auto dots = spec.find(".."); dots != std::string::npos) {
    const std::size_t lo = parse_count(spec.substr(0, dots));
    const std::size_t hi = parse_count(spec.substr(dots + 2));
    if (lo < 1 || hi < lo) throw ConfigError("bad n range '" + spec + "'");
    for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
    return out;
  }
  for (const auto& part : split(spec, ',')) out.push_back(parse_count(part));
  if (out.empty()) throw ConfigError("empty n axis");
  return out;
}

bool parse_switch(const std::string& s) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw ConfigError("expected on or off, got '" + s + "'");
}

RunConfig make_config(const Options& o) {
  RunConfig c;
  c.mode = parse_mode(o.mode);
  c.framing = parse_framing(o.framing);
  c.use_context = o.use_context;
  c.num_descriptions = o.num_descriptions;
  c.aggregation = parse_aggregation(o.aggregation);
  c.num_runs = o.num_runs;
  c.base_seed = o.base_seed;
  c.shots = o.shots;
  c.include_template = !o.exclude_template;
  if (!o.zicl_corpus.empty()) {
    if (o.zicl_k == 0) throw ConfigError("--zicl-corpus needs --zicl-k >= 1");
    c.zicl = ZiclConfig{o.zicl_corpus, o.zicl_k};
  } else if (o.zicl_k > 0) {
    throw ConfigError("--zicl-k needs --zicl-corpus");
  }
  if (c.shots > 0 && o.demos.empty())
    throw ConfigError("--shots needs --demos");
  return c;
}

SweepAxes make_axes(const Options& o) {
  SweepAxes axes;
  if (!o.sweep_n.empty()) axes.num_descriptions = parse_n_axis(o.sweep_n);
  for (const auto& a : split(o.sweep_aggregation, ','))
    axes.aggregation.push_back(parse_aggregation(a));
  for (const auto& c : split(o.sweep_context, ','))
    axes.use_context.push_back(parse_switch(c));
  return axes;
}

void apply_paper_defaults(Options& o, const Given& given) {
  if (!given.mode) o.mode = "generative";
  if (!given.use_context) o.use_context = true;
  if (!given.aggregation) o.aggregation = "arithmetic";
  if (!given.num_runs) o.num_runs = 10;
  if (!given.sweep_n && !given.num_descriptions) o.sweep_n = "1..10";
}

std::vector<std::string> load_corpus(const std::string& path) {
  std::vector<std::string> texts;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) texts.push_back(line);
  }
  return texts;
}

// Everything read from disk for a run.
struct Inputs {
  TaskManifest manifest;
  std::vector<Example> dataset;
  std::vector<Example> demos;
  std::vector<std::string> corpus;
  std::vector<DescriptionTemplate> templates;
  std::optional<ParaphraseFile> paraphrases;
  std::string dataset_digest;
};

void load_description_sources(const Options& o, Inputs& in) {
  if (o.templates.empty() && o.paraphrases.empty())
    throw ConfigError("need --templates or --paraphrases");
  if (!o.templates.empty())
    in.templates = load_template_pack(o.templates, in.manifest.labels);
  if (!o.paraphrases.empty())
    in.paraphrases = load_paraphrases(o.paraphrases, in.manifest.labels);
}

Inputs load_inputs(const Options& o, bool need_dataset) {
  Inputs in;
  in.manifest = load_manifest(o.manifest);
  if (need_dataset) {
    if (o.dataset.empty()) throw ConfigError("--dataset is required");
    in.dataset = load_dataset(o.dataset, in.manifest);
    in.dataset_digest = sha256_hex(read_all(o.dataset));
  }
  if (!o.demos.empty()) in.demos = load_dataset(o.demos, in.manifest);
  if (!o.zicl_corpus.empty()) in.corpus = load_corpus(o.zicl_corpus);
  load_description_sources(o, in);
  return in;
}

std::vector<ContextAssignment> contexts_for(const Inputs& in, bool use_context) {
  std::vector<Example> needed = in.dataset;
  // Demos without context borrow the test example's, so only explicit ones
  // need entries of their own.
  for (const auto& d : in.demos) {
    if (!d.context().empty()) needed.push_back(d);
  }
  return required_contexts(needed, use_context);
}

DescriptionPool make_pool(const Inputs& in, bool use_context,
                          bool include_template) {
  const auto contexts = contexts_for(in, use_context);
  return build_pool(in.templates, in.paraphrases ? &*in.paraphrases : nullptr,
                    in.manifest.labels, contexts,
                    PoolOptions{use_context, include_template});
}

// Backend plus optional cache, owned together.
struct Backend {
  std::unique_ptr<Scorer> base;
  std::unique_ptr<ScoreCache> cache;
  std::unique_ptr<CachingScorer> cached;
  std::string model;

  Scorer& scorer() { return cached ? static_cast<Scorer&>(*cached) : *base; }
};

std::string resolve_endpoint(const Options& o) {
  if (!o.endpoint.empty()) return o.endpoint;
  if (const char* env = std::getenv(kEndpointEnv)) return env;
  return {};
}

Backend make_backend(const Options& o) {
  Backend b;
  if (o.backend == "mock") {
    b.base = std::make_unique<MockScorer>();
    b.model = o.model.empty() ? "mock" : o.model;
  } else if (o.backend == "remote") {
    const std::string endpoint = resolve_endpoint(o);
    if (endpoint.empty())
      throw ConfigError(std::string("remote backend needs --endpoint or ") +
                        kEndpointEnv);
    auto remote = std::make_unique<RemoteScorer>(RemoteScorerOptions{
        endpoint, std::chrono::milliseconds(o.timeout_ms), o.max_in_flight,
        o.batch});
    // Fails fast with kUnreachable before any work starts.
    const auto health = remote->health();
    b.model = o.model.empty() ? health.model : o.model;
    b.base = std::move(remote);
  } else {
    throw ConfigError("unknown backend '" + o.backend + "'");
  }
  if (!o.cache.empty()) {
    b.cache = std::make_unique<ScoreCache>(o.cache);
    b.cached = std::make_unique<CachingScorer>(*b.base, *b.cache);
  }
  return b;
}

// Result-affecting settings that live outside RunConfig.
json report_echo(const Options& o, const Inputs& in, const Backend& b) {
  json j{{"backend", o.backend},
         {"model", b.model},
         {"paper_defaults", o.paper_defaults},
         {"dataset_sha256", in.dataset_digest}};
  j["templates"] = !o.templates.empty();
  j["paraphrases"] = !o.paraphrases.empty();
  return j;
}

// Operational settings: printed, but kept out of reports so that reports
// stay byte-identical across cache, parallelism and output choices.
void print_invocation(const Options& o, const std::string& command,
                      std::ostream& err) {
  json j{{"command", command},
         {"manifest", o.manifest},
         {"dataset", o.dataset},
         {"templates", o.templates},
         {"paraphrases", o.paraphrases},
         {"demos", o.demos},
         {"zicl_corpus", o.zicl_corpus},
         {"endpoint", resolve_endpoint(o)},
         {"timeout_ms", o.timeout_ms},
         {"max_in_flight", o.max_in_flight},
         {"batch", o.batch},
         {"cache", o.cache},
         {"report", o.report},
         {"csv", o.csv},
         {"jobs", o.jobs}};
  err << "zsc: invocation " << j.dump() << "\n";
}

EvalInputs eval_inputs(const Inputs& in, const DescriptionPool& pool) {
  EvalInputs e;
  e.labels = &in.manifest.labels;
  e.examples = in.dataset;
  e.pool = &pool;
  e.demo_candidates = in.demos;
  e.zicl_corpus = in.corpus;
  return e;
}

EvalOptions eval_options(const Options& o, const Inputs& in, Backend& b) {
  EvalOptions e;
  e.model_id = b.model;
  e.jobs = o.jobs;
  e.echo_extra = report_echo(o, in, b);
  e.fingerprint_extra = b.base->backend_id() + "\x1f" + in.dataset_digest;
  return e;
}

std::string sweep_csv(std::span<const EvaluationReport> reports) {
  std::ostringstream out;
  out.precision(17);
  out << "use_context,num_descriptions,aggregation,run,macro_f1\n";
  for (const auto& r : reports) {
    for (const auto& run : r.runs) {
      if (!run.complete) continue;
      out << (r.config.use_context ? "on" : "off") << ','
          << r.config.num_descriptions << ',' << to_string(r.config.aggregation)
          << ',' << run.run << ',' << run.macro_f1 << '\n';
    }
  }
  return out.str();
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err,
              const std::string& command) {
  print_invocation(o, command, err);
  const Inputs in = load_inputs(o, true);
  const RunConfig base = make_config(o);
  const SweepAxes axes = make_axes(o);

  std::map<bool, DescriptionPool> pools;
  for (bool ctx : axes.use_context.empty() ? std::vector<bool>{base.use_context}
                                           : axes.use_context) {
    pools.emplace(ctx, make_pool(in, ctx, base.include_template));
  }
  Backend b = make_backend(o);
  EvalOptions opts = eval_options(o, in, b);
  opts.echo_extra["sweep"] = {
      {"num_descriptions", axes.num_descriptions},
      {"aggregation", split(o.sweep_aggregation, ',')},
      {"use_context", axes.use_context}};

  const auto reports = sweep(
      eval_inputs(in, pools.begin()->second), base, axes,
      [&](bool ctx) -> const DescriptionPool& { return pools.at(ctx); },
      b.scorer(), opts);
  write_output(o.report, serialize_sweep(reports, in.manifest.labels), out);
  if (!o.csv.empty()) write_output(o.csv, sweep_csv(reports), out);

  std::size_t expected = 1;
  expected *= axes.use_context.empty() ? 1 : axes.use_context.size();
  expected *= axes.num_descriptions.empty() ? 1 : axes.num_descriptions.size();
  expected *= axes.aggregation.empty() ? 1 : axes.aggregation.size();
  if (reports.size() != expected || !reports.back().complete) {
    err << "zsc: sweep incomplete: " << reports.back().runs.back().error
        << "\n";
    return kRunIncomplete;
  }
  return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  // The preset's n axis turns a single evaluation into a sweep.
  if (!o.sweep_n.empty() || !o.sweep_aggregation.empty() ||
      !o.sweep_context.empty()) {
    return cmd_sweep(o, out, err, "evaluate");
  }
  print_invocation(o, "evaluate", err);
  const Inputs in = load_inputs(o, true);
  const RunConfig config = make_config(o);
  const DescriptionPool pool =
      make_pool(in, config.use_context, config.include_template);
  Backend b = make_backend(o);
  const auto report = evaluate(eval_inputs(in, pool), config, b.scorer(),
                               eval_options(o, in, b));
  write_output(o.report, serialize_report(report, in.manifest.labels), out);
  if (!o.csv.empty()) write_output(o.csv, report_csv(report), out);
  if (!report.complete) {
    err << "zsc: run incomplete: " << report.runs.back().error << "\n";
    return kRunIncomplete;
  }
  return kOk;
}

// Streams predictions; pool entries are built per context on first use.
class StreamingPool {
 public:
  StreamingPool(const Inputs& in, const RunConfig& config)
      : in_(in), config_(config) {}

  const DescriptionPool& cover(const Example& x) {
    if (!config_.use_context) {
      add(ContextAssignment{});
      return pool_;
    }
    for (const auto& c : x.contexts) add(c);
    return pool_;
  }

 private:
  void add(const ContextAssignment& ctx) {
    if (!seen_.insert(ctx.fingerprint()).second) return;
    const std::vector<ContextAssignment> one = {ctx};
    const DescriptionPool part = build_pool(
        in_.templates, in_.paraphrases ? &*in_.paraphrases : nullptr,
        in_.manifest.labels, one,
        PoolOptions{config_.use_context, config_.include_template});
    for (const auto& [key, entry] : part.entries())
      pool_.add(key.label, entry.context, entry.descriptions);
    config_.validate(pool_);
  }

  const Inputs& in_;
  const RunConfig& config_;
  DescriptionPool pool_;
  std::set<std::string> seen_;
};

ContextAssignment parse_context_flags(const std::vector<std::string>& kvs) {
  std::map<std::string, std::string> bindings;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--context expects name=value, got '" + kv + "'");
    bindings[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return ContextAssignment(std::move(bindings));
}

int cmd_predict(const Options& o, std::istream& stdin_stream, std::ostream& out,
                std::ostream& err) {
  print_invocation(o, "predict", err);
  if (o.text.empty() == o.dataset.empty())
    throw ConfigError("predict needs exactly one of --text or --dataset");
  Inputs in = load_inputs(o, false);
  const RunConfig config = make_config(o);
  if (config.shots > in.demos.size())
    throw ConfigError("--shots exceeds the number of demonstrations");
  if (config.zicl && config.zicl->k > in.corpus.size())
    throw ConfigError("--zicl-k exceeds the corpus size");
  Backend b = make_backend(o);
  const ModeSpec mode = ModeSpec::from(config);
  StreamingPool pools(in, config);

  DescriptionPool empty_pool;
  const EvalInputs plan_inputs = eval_inputs(in, empty_pool);
  const RunPlan plan = plan_run(plan_inputs, config, 0);
  for (const auto& d : plan.demos) {
    if (!d.context().empty()) pools.cover(d);
  }

  PredictOptions po;
  po.model_id = b.model;
  po.num_descriptions = config.num_descriptions;
  po.sample = SampleKey{config.base_seed, 0};

  std::size_t index = 0;
  auto emit = [&](const Example& x) {
    in.manifest.schema.validate(x.context());
    const DescriptionPool& pool = pools.cover(x);
    po.demo_prefix.clear();
    if (!plan.demos.empty())
      po.demo_prefix = build_icl_prompt(plan.demos, x, pool, mode, plan.seed).rendered;
    const Prediction p = predict(x, pool, in.manifest.labels, mode, po, b.scorer());
    json j = to_json(p, in.manifest.labels);
    j["index"] = index++;
    out << j.dump() << "\n";
    out.flush();
  };

  try {
    if (!o.text.empty()) {
      Example x;
      x.text = o.text;
      x.contexts = {parse_context_flags(o.context)};
      emit(x);
      return kOk;
    }
    std::ifstream file;
    std::istream* src = &stdin_stream;
    if (o.dataset != "-") {
      file.open(o.dataset);
      if (!file) throw ConfigError("cannot read '" + o.dataset + "'");
      src = &file;
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(*src, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      emit(parse_example(line, line_no, in.manifest));
    }
  } catch (const ScorerError& e) {
    err << "zsc: scoring failed at example " << index << ": " << e.what() << "\n";
    return e.kind() == ScorerError::Kind::kUnreachable ? kScorerUnreachable
                                                       : kRunIncomplete;
  }
  return kOk;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  const Inputs in = load_inputs(o, true);
  const RunConfig config = make_config(o);
  json contexts = json::array();
  for (const auto& c : contexts_for(in, config.use_context))
    contexts.push_back({{"fingerprint", c.fingerprint()}, {"context", c.to_json()}});
  json doc{{"labels", json::array()},
           {"examples", in.dataset.size()},
           {"contexts", contexts},
           {"use_context", config.use_context}};
  for (const auto& l : in.manifest.labels) doc["labels"].push_back(l.name);
  try {
    const DescriptionPool pool =
        make_pool(in, config.use_context, config.include_template);
    config.validate(pool);
    if (config.shots > in.demos.size())
      throw ConfigError("--shots exceeds the number of demonstrations");
    if (config.zicl && config.zicl->k > in.corpus.size())
      throw ConfigError("--zicl-k exceeds the corpus size");
    doc["pool"] = {{"entries", pool.entries().size()},
                   {"min_entry_size", pool.min_entry_size()}};
    doc["ok"] = true;
    out << doc.dump(2) << "\n";
    return kOk;
  } catch (const Error& e) {
    // Print the fingerprints a paraphrase file must use before failing.
    doc["ok"] = false;
    doc["error"] = e.what();
    out << doc.dump(2) << "\n";
    err << "zsc: " << e.what() << "\n";
    return kConfigError;
  }
}

int cmd_cache(const std::string& action, const Options& o, std::ostream& out) {
  if (o.cache.empty()) throw ConfigError("--cache is required");
  if (!fs::exists(o.cache))
    throw ConfigError("--cache: no such file '" + o.cache + "'");
  if (action == "verify") {
    const auto r = verify_cache_file(o.cache);
    out << json{{"lines", r.lines},
                {"valid", r.valid},
                {"corrupt", r.corrupt},
                {"key_mismatch", r.key_mismatch},
                {"duplicates", r.duplicates},
                {"unique_keys", r.unique_keys},
                {"ok", r.ok()}}
               .dump(2)
        << "\n";
    return r.ok() ? kOk : kFailure;
  }
  ScoreCache cache(o.cache);
  const auto before = cache.stats();
  json j{{"records", before.records},
         {"lines", before.loaded_lines},
         {"corrupt_lines", before.corrupt_lines},
         {"bytes", fs::file_size(o.cache)}};
  if (action == "compact") {
    cache.compact();
    j["bytes_after"] = fs::file_size(o.cache);
  }
  out << j.dump(2) << "\n";
  return kOk;
}

int cmd_probe(const Options& o, std::ostream& out, std::ostream& err) {
  Backend b = make_backend(o);
  Scorer& s = *b.base;
  json j{{"backend", o.backend}, {"model", b.model}};
  if (auto* remote = dynamic_cast<RemoteScorer*>(b.base.get())) {
    const auto h = remote->health();
    j["health"] = {{"model", h.model}, {"context_length", h.context_length}};
  }
  auto total = [&](std::string prefix, std::string continuation) {
    return s.score(ScoreQuery{b.model, std::move(prefix), std::move(continuation), false})
        .total_logprob;
  };
  const double conditional = total("Hello", " world");
  const double full = total("", "Hello world");
  const double head = total("", "Hello");
  const double null = s.score_null(b.model, " world").total_logprob;
  const bool chain_ok = std::abs(conditional - (full - head)) <= 1e-4;
  j["canary"] = {{"conditional", conditional},
                 {"full", full},
                 {"prefix_only", head},
                 {"null", null},
                 {"chain_rule_ok", chain_ok}};
  out << j.dump(2) << "\n";
  if (!chain_ok) {
    err << "zsc: chain rule check failed\n";
    return kFailure;
  }
  return kOk;
}

void add_input_flags(CLI::App& app, Options& o, bool dataset) {
  app.add_option("--manifest", o.manifest, "Task manifest JSON")->required();
  if (dataset) app.add_option("--dataset", o.dataset, "Dataset JSONL");
  app.add_option("--templates", o.templates, "Template pack JSON");
  app.add_option("--paraphrases", o.paraphrases, "Paraphrase file JSON");
  app.add_option("--demos", o.demos, "Labeled demonstrations JSONL");
}

void add_config_flags(CLI::App& app, Options& o, Given& g) {
  app.add_option("--mode", o.mode,
                 "generative | discriminative | discriminative-pmi")
      ->capture_default_str()
      ->each([&](const std::string&) { g.mode = true; });
  app.add_option("--framing", o.framing, "none | context | instruct")
      ->capture_default_str();
  app.add_option_function<std::string>(
         "--use-context",
         [&](const std::string& v) {
           o.use_context = parse_switch(v);
           g.use_context = true;
         },
         "on | off (default on)");
  app.add_option("--num-descriptions,--n", o.num_descriptions,
                 "Descriptions sampled per label and context")
      ->capture_default_str()
      ->each([&](const std::string&) { g.num_descriptions = true; });
  app.add_option("--aggregation,--agg", o.aggregation,
                 "arithmetic | geometric | harmonic")
      ->capture_default_str()
      ->each([&](const std::string&) { g.aggregation = true; });
  app.add_option("--num-runs,--runs", o.num_runs)
      ->capture_default_str()
      ->each([&](const std::string&) { g.num_runs = true; });
  app.add_option("--base-seed,--seed", o.base_seed)->capture_default_str();
  app.add_option("--shots", o.shots, "Demonstrations per prompt")
      ->capture_default_str();
  app.add_option("--zicl-corpus", o.zicl_corpus,
                 "Unlabeled texts, one per line");
  app.add_option("--zicl-k", o.zicl_k)->capture_default_str();
  app.add_flag("--exclude-template", o.exclude_template,
               "Drop the template expansion from the pool");
}

void add_sweep_flags(CLI::App& app, Options& o, Given& g) {
  app.add_option("--sweep-n", o.sweep_n, "n axis: 1..10 or 1,3,5")
      ->each([&](const std::string&) { g.sweep_n = true; });
  app.add_option("--sweep-aggregation,--sweep-agg", o.sweep_aggregation,
                 "Comma-separated aggregations");
  app.add_option("--sweep-context", o.sweep_context, "on,off");
  app.add_flag("--paper-defaults", o.paper_defaults,
               "generative, context on, arithmetic, 10 runs, n = 1..10");
}

void add_backend_flags(CLI::App& app, Options& o) {
  app.add_option("--backend", o.backend, "mock | remote")->capture_default_str();
  app.add_option("--model", o.model, "Model id (remote default: health model)");
  app.add_option("--endpoint", o.endpoint,
                 std::string("Scorer URL (default $") + kEndpointEnv + ")");
  app.add_option("--timeout", o.timeout_ms, "Request timeout, ms")
      ->capture_default_str();
  app.add_option("--max-in-flight", o.max_in_flight)->capture_default_str();
  app.add_option("--batch", o.batch)->capture_default_str();
  app.add_option("--cache", o.cache, "Score cache JSONL");
}

void add_output_flags(CLI::App& app, Options& o) {
  app.add_option("--report", o.report, "Report path (default stdout)");
  app.add_option("--csv", o.csv, "Per-run macro-F1 CSV");
  app.add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
}

void check_paths(const Options& o) {
  require_file(o.manifest, "--manifest");
  require_file(o.dataset, "--dataset");
  require_file(o.templates, "--templates");
  require_file(o.paraphrases, "--paraphrases");
  require_file(o.demos, "--demos");
  require_file(o.zicl_corpus, "--zicl-corpus");
}

}  // namespace

int run(std::vector<std::string> args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Options o;
  Given g;
  CLI::App app{"Zero- and few-shot text classification with label descriptions"};
  app.name("zsc");
  app.require_subcommand(1);

  auto* predict_cmd = app.add_subcommand("predict", "Classify one text or a JSONL stream");
  add_input_flags(*predict_cmd, o, true);
  predict_cmd->add_option("--text", o.text, "Single input text");
  predict_cmd->add_option("--context", o.context, "name=value, repeatable");
  add_config_flags(*predict_cmd, o, g);
  add_backend_flags(*predict_cmd, o);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Seeded multi-run evaluation");
  add_input_flags(*evaluate_cmd, o, true);
  add_config_flags(*evaluate_cmd, o, g);
  add_sweep_flags(*evaluate_cmd, o, g);
  add_backend_flags(*evaluate_cmd, o);
  add_output_flags(*evaluate_cmd, o);

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate every cell of context x n x aggregation");
  add_input_flags(*sweep_cmd, o, true);
  add_config_flags(*sweep_cmd, o, g);
  add_sweep_flags(*sweep_cmd, o, g);
  add_backend_flags(*sweep_cmd, o);
  add_output_flags(*sweep_cmd, o);

  auto* validate_cmd = app.add_subcommand("validate", "Check manifest, pool and dataset coverage");
  add_input_flags(*validate_cmd, o, true);
  add_config_flags(*validate_cmd, o, g);

  auto* cache_cmd = app.add_subcommand("cache", "Inspect or maintain a score cache");
  cache_cmd->require_subcommand(1);
  std::string cache_action;
  const std::pair<const char*, const char*> actions[] = {
      {"stats", "Record and line counts"},
      {"compact", "Rewrite keeping the last record per key"},
      {"verify", "Recheck every line's key and tiling; exit 1 on problems"}};
  for (const auto& [action, what] : actions) {
    auto* sub = cache_cmd->add_subcommand(action, what);
    sub->add_option("--cache", o.cache, "Score cache JSONL")->required();
    sub->callback([&cache_action, action] { cache_action = action; });
  }

  auto* probe_cmd = app.add_subcommand("probe", "Check a scorer backend with a canary query");
  add_backend_flags(*probe_cmd, o);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "zsc: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "zsc: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    check_paths(o);
    if (o.paper_defaults) apply_paper_defaults(o, g);
    if (*predict_cmd) return cmd_predict(o, in, out, err);
    if (*evaluate_cmd) return cmd_evaluate(o, out, err);
    if (*sweep_cmd) return cmd_sweep(o, out, err, "sweep");
    if (*validate_cmd) return cmd_validate(o, out, err);
    if (*cache_cmd) return cmd_cache(cache_action, o, out);
    if (*probe_cmd) return cmd_probe(o, out, err);
  } catch (const ScorerError& e) {
    err << "zsc: scorer: " << e.what() << "\n";
    return e.kind() == ScorerError::Kind::kUnreachable ? kScorerUnreachable
                                                       : kFailure;
  } catch (const DataError& e) {
    err << "zsc: data: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "zsc: config: " << e.what() << "\n";
    return kConfigError;
  } catch (const TemplateError& e) {
    err << "zsc: template: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "zsc: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace zsc::cli
