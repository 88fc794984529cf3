#include "litmt/config.hpp"

#include <cmath>

#include "litmt/io.hpp"

namespace litmt {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const char* to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::identity: return "identity";
    case BackendKind::table: return "table";
    case BackendKind::scripted: return "scripted";
    case BackendKind::http: return "http";
  }
  return "?";
}

namespace {

// Dotted keys whose values are file system paths.
const std::vector<std::string> kPathKeys = {
    "corpus.records",      "corpus.source_lines", "corpus.target_lines", "decoding.pool",
    "backend.file",        "evaluate.hypotheses", "evaluate.references", "output_dir",
};

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return parts;
}

ojson* find_path(ojson& j, const std::string& key) {
  ojson* cur = &j;
  for (const auto& part : split_key(key)) {
    if (!cur->is_object() || !cur->contains(part)) return nullptr;
    cur = &(*cur)[part];
  }
  return cur;
}

void resolve_paths(ojson& j, const fs::path& base) {
  for (const auto& key : kPathKeys) {
    ojson* v = find_path(j, key);
    if (!v || !v->is_string()) continue;
    const fs::path p = v->get<std::string>();
    if (!p.empty() && p.is_relative()) *v = (base / p).lexically_normal().string();
  }
}

void merge_into(ojson& dst, const ojson& src, const std::string& prefix) {
  for (const auto& [k, v] : src.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (!dst.contains(k)) throw ConfigError("unknown config key '" + key + "'");
    if (dst[k].is_object()) {
      if (!v.is_object()) throw ConfigError("config key '" + key + "' must be an object");
      merge_into(dst[k], v, key);
    } else {
      dst[k] = v;
    }
  }
}

class Reader {
 public:
  Reader(const ojson& root, std::string prefix) : root_(root), prefix_(std::move(prefix)) {}

  Reader sub(const std::string& key) const { return Reader(root_.at(key), name(key)); }

  std::string str(const std::string& key) const {
    const auto& v = root_.at(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }
  fs::path path(const std::string& key) const { return fs::path(str(key)); }
  bool flag(const std::string& key) const {
    const auto& v = root_.at(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }
  double real(const std::string& key) const {
    const auto& v = root_.at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }
  std::size_t count(const std::string& key, std::size_t min = 0) const {
    const auto& v = root_.at(key);
    if (!v.is_number_integer()) fail(key, "must be an integer");
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u < min) fail(key, "must be >= " + std::to_string(min));
      return static_cast<std::size_t>(u);
    }
    const auto i = v.get<std::int64_t>();
    if (i < 0 || static_cast<std::uint64_t>(i) < min) fail(key, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(i);
  }
  template <typename E>
  E choice(const std::string& key, std::initializer_list<std::pair<const char*, E>> options) const {
    const std::string s = str(key);
    std::string allowed;
    for (const auto& [label, value] : options) {
      if (s == label) return value;
      allowed += allowed.empty() ? "" : ", ";
      allowed += label;
    }
    fail(key, "must be one of: " + allowed);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError("config key '" + name(key) + "' " + why);
  }

 private:
  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const ojson& root_;
  std::string prefix_;
};

void require_file(const fs::path& p, const std::string& key) {
  if (p.empty()) return;
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw ConfigError("config key '" + key + "': file not found: " + p.string());
}

}  // namespace

ojson default_config_json() {
  const RunConfig d;
  const PromptTemplate& t = d.decoding.templates;
  const EndpointConfig& e = d.backend.endpoint;
  ojson j;
  j["corpus"] = {{"format", "records"},
                 {"records", ""},
                 {"source_lines", ""},
                 {"target_lines", ""},
                 {"boundary_marker", ""}};
  j["stage"] = {{"stage1_budget", d.stage1_budget},
                {"stage1_side", "source"},
                {"stage2_budget", d.stage2_budget},
                {"instruction", d.instruction.text}};
  j["decoding"] = {{"history", d.decoding.history},
                   {"exemplars", d.decoding.exemplars},
                   {"alpha", d.decoding.alpha},
                   {"max_keywords", d.decoding.max_keywords},
                   {"retry", d.decoding.retry},
                   {"backoff_initial_ms", d.decoding.backoff_initial.count()},
                   {"backoff_factor", d.decoding.backoff_factor},
                   {"fallback", to_string(d.decoding.fallback)},
                   {"exemplar_source", to_string(d.decoding.exemplar_source)},
                   {"pool", ""},
                   {"templates",
                    {{"system", t.system},
                     {"prompt", t.prompt},
                     {"context_header", t.context_header},
                     {"context_item", t.context_item},
                     {"context_footer", t.context_footer},
                     {"exemplar_header", t.exemplar_header},
                     {"exemplar_item", t.exemplar_item},
                     {"exemplar_footer", t.exemplar_footer}}}};
  j["backend"] = {{"kind", to_string(d.backend.kind)},
                  {"file", ""},
                  {"base_url", e.base_url},
                  {"path", e.path},
                  {"model", e.model},
                  {"api_key_env", e.api_key_env},
                  {"timeout_seconds", e.timeout_seconds},
                  {"temperature", e.temperature},
                  {"max_tokens", e.max_tokens},
                  {"supports_system_role", e.supports_system_role},
                  {"max_prompt_length", e.max_prompt_length},
                  {"rate_cap", e.rate_cap},
                  {"pool_size", e.pool_size}};
  j["parallelism"] = d.parallelism;
  j["metrics"] = {{"max_order", d.metrics.max_order},
                  {"smoothing", to_string(d.metrics.smoothing)},
                  {"tokenize", to_string(d.metrics.tokenization)},
                  {"lowercase", d.metrics.lowercase}};
  j["evaluate"] = {{"hypotheses", ""}, {"references", ""}};
  j["output_dir"] = d.output_dir.string();
  return j;
}

void apply_override(ojson& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  ojson* target = find_path(j, key);
  if (!target) throw ConfigError("unknown config key '" + key + "'");
  if (target->is_object()) throw ConfigError("config key '" + key + "' is a section, not a value");
  ojson value = ojson::parse(raw, nullptr, false);
  // Bare words and anything that only looks like JSON stay strings when the
  // slot holds a string.
  if (value.is_discarded() || (target->is_string() && !value.is_string())) value = raw;
  *target = std::move(value);
}

RunConfig load_run_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides) {
  ojson merged = default_config_json();
  if (file) {
    ojson from_file;
    try {
      from_file = ojson::parse(io::read_file(*file));
    } catch (const ojson::parse_error& e) {
      throw ConfigError("config file " + file->string() + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    if (!from_file.is_object()) throw ConfigError("config file " + file->string() + " must hold a JSON object");
    resolve_paths(from_file, fs::absolute(*file).parent_path());
    merge_into(merged, from_file, "");
  }
  for (const auto& o : overrides) apply_override(merged, o);
  return parse_run_config(merged);
}

RunConfig parse_run_config(const ojson& merged) {
  // Unknown keys are rejected by merging onto a fresh default tree.
  ojson j = default_config_json();
  merge_into(j, merged, "");

  RunConfig c;
  const Reader root(j, "");

  const Reader corpus = root.sub("corpus");
  c.corpus.format = corpus.choice<CorpusFormat>("format", {{"records", CorpusFormat::records}, {"lines", CorpusFormat::lines}});
  c.corpus.records = corpus.path("records");
  c.corpus.source_lines = corpus.path("source_lines");
  c.corpus.target_lines = corpus.path("target_lines");
  c.corpus.boundary_marker = corpus.str("boundary_marker");

  const Reader stage = root.sub("stage");
  c.stage1_budget = stage.count("stage1_budget", 1);
  c.stage1_side = stage.choice<Side>("stage1_side", {{"source", Side::source}, {"target", Side::target}});
  c.stage2_budget = stage.count("stage2_budget", 1);
  c.instruction.text = stage.str("instruction");

  const Reader dec = root.sub("decoding");
  c.decoding.history = dec.count("history");
  c.decoding.exemplars = dec.count("exemplars");
  c.decoding.alpha = dec.real("alpha");
  c.decoding.max_keywords = dec.count("max_keywords");
  c.decoding.retry = dec.count("retry");
  c.decoding.backoff_initial = std::chrono::milliseconds(dec.count("backoff_initial_ms"));
  c.decoding.backoff_factor = dec.real("backoff_factor");
  c.decoding.fallback = dec.choice<FallbackPolicy>(
      "fallback", {{"copy_source", FallbackPolicy::copy_source}, {"abort", FallbackPolicy::abort}});
  c.decoding.exemplar_source = dec.choice<ExemplarSource>(
      "exemplar_source", {{"prefix", ExemplarSource::prefix}, {"external", ExemplarSource::external}});
  c.pool = dec.path("pool");
  const Reader tpl = dec.sub("templates");
  auto& t = c.decoding.templates;
  t.system = tpl.str("system");
  t.prompt = tpl.str("prompt");
  t.context_header = tpl.str("context_header");
  t.context_item = tpl.str("context_item");
  t.context_footer = tpl.str("context_footer");
  t.exemplar_header = tpl.str("exemplar_header");
  t.exemplar_item = tpl.str("exemplar_item");
  t.exemplar_footer = tpl.str("exemplar_footer");

  const Reader be = root.sub("backend");
  c.backend.kind = be.choice<BackendKind>("kind", {{"identity", BackendKind::identity},
                                                   {"table", BackendKind::table},
                                                   {"scripted", BackendKind::scripted},
                                                   {"http", BackendKind::http}});
  c.backend.file = be.path("file");
  auto& e = c.backend.endpoint;
  e.base_url = be.str("base_url");
  e.path = be.str("path");
  e.model = be.str("model");
  e.api_key_env = be.str("api_key_env");
  e.timeout_seconds = be.real("timeout_seconds");
  e.temperature = be.real("temperature");
  e.max_tokens = static_cast<int>(be.count("max_tokens", 1));
  e.supports_system_role = be.flag("supports_system_role");
  e.max_prompt_length = be.count("max_prompt_length");
  e.rate_cap = be.real("rate_cap");
  e.pool_size = be.count("pool_size", 1);
  if (e.timeout_seconds <= 0) be.fail("timeout_seconds", "must be > 0");
  if (e.rate_cap < 0) be.fail("rate_cap", "must be >= 0");

  c.parallelism = root.count("parallelism", 1);

  const Reader m = root.sub("metrics");
  c.metrics.max_order = m.count("max_order", 1);
  c.metrics.smoothing = m.choice<Smoothing>("smoothing", {{"exp", Smoothing::exp_floor}, {"none", Smoothing::none}});
  c.metrics.tokenization =
      m.choice<BleuTokenization>("tokenize", {{"13a", BleuTokenization::intl13a}, {"char", BleuTokenization::character}});
  c.metrics.lowercase = m.flag("lowercase");

  const Reader ev = root.sub("evaluate");
  c.hypotheses = ev.path("hypotheses");
  c.references = ev.path("references");
  c.output_dir = root.path("output_dir");
  if (c.output_dir.empty()) root.fail("output_dir", "must not be empty");

  try {
    c.decoding.check();
    c.instruction.check();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }

  if (c.corpus.format == CorpusFormat::lines && c.corpus.source_lines.empty() && !c.corpus.target_lines.empty())
    throw ConfigError("config key 'corpus.target_lines' given without 'corpus.source_lines'");
  if ((c.backend.kind == BackendKind::table || c.backend.kind == BackendKind::scripted) && c.backend.file.empty())
    throw ConfigError(std::string("backend kind '") + to_string(c.backend.kind) + "' needs 'backend.file'");
  if (c.backend.kind == BackendKind::http) {
    if (e.base_url.empty()) throw ConfigError("backend kind 'http' needs 'backend.base_url'");
    if (e.model.empty()) throw ConfigError("backend kind 'http' needs 'backend.model'");
  }

  require_file(c.corpus.format == CorpusFormat::records ? c.corpus.records : c.corpus.source_lines,
               c.corpus.format == CorpusFormat::records ? "corpus.records" : "corpus.source_lines");
  if (c.corpus.format == CorpusFormat::lines) require_file(c.corpus.target_lines, "corpus.target_lines");
  require_file(c.pool, "decoding.pool");
  if (c.backend.kind == BackendKind::table || c.backend.kind == BackendKind::scripted)
    require_file(c.backend.file, "backend.file");
  require_file(c.hypotheses, "evaluate.hypotheses");
  require_file(c.references, "evaluate.references");

  c.effective = std::move(j);
  return c;
}

}  // namespace litmt
