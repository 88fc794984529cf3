#include "litmt/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "litmt/http_backend.hpp"
#include "litmt/io.hpp"
#include "litmt/metrics.hpp"
#include "litmt/stage_data.hpp"
#include "litmt/text.hpp"

namespace litmt {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::ostream& out_of(const CliEnvironment& env) { return env.out ? *env.out : std::cout; }
std::ostream& err_of(const CliEnvironment& env) { return env.err ? *env.err : std::cerr; }

// Input problems that map to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Corpus checked_corpus(const RunConfig& config, const CliEnvironment& env) {
  Corpus corpus = load_corpus(config);
  const auto report = validate(corpus);
  if (!report.ok()) {
    for (const auto& v : report.violations) err_of(env) << "  " << v.to_string() << '\n';
    throw InputError("corpus failed validation with " + std::to_string(report.violations.size()) + " violation(s)");
  }
  return corpus;
}

std::vector<PoolEntry> pool_entries(const Corpus& corpus) {
  std::vector<PoolEntry> pool;
  for (const auto& doc : corpus.documents)
    for (const auto& p : doc.pairs())
      if (p.target) pool.push_back(PoolEntry{p.source, *p.target, doc.doc_id, p.seg_index});
  return pool;
}

std::optional<ExemplarIndex> external_index(const RunConfig& config) {
  if (config.pool.empty()) return std::nullopt;
  const Corpus pool = load_records(config.pool);
  if (!pool.is_parallel()) throw InputError("exemplar pool " + config.pool.string() + " has pairs without targets");
  return ExemplarIndex::build(pool_entries(pool), config.decoding.max_keywords);
}

ojson manifest_json(const RunManifest& m, const ojson& effective) {
  ojson j;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["elapsed_seconds"] = m.elapsed_seconds;
  j["parallelism"] = m.parallelism;
  j["backend"] = m.backend;
  j["documents"] = m.documents;
  j["completed_documents"] = m.completed_documents;
  j["sentences"] = m.sentences;
  j["failed_sentences"] = m.failed_sentences;
  j["backend_attempts"] = m.backend_attempts;
  j["aborted"] = ojson::array();
  for (const auto& [doc, reason] : m.aborted) j["aborted"].push_back({{"doc_id", doc}, {"reason", reason}});
  j["config"] = effective;
  return j;
}

template <typename F>
int guarded(const CliEnvironment& env, F&& body) {
  try {
    return body();
  } catch (const AlignmentError& e) {
    for (const auto& gap : e.gaps()) err_of(env) << "  " << gap << '\n';
    err_of(env) << "error: " << e.what() << '\n';
    return kExitAlignment;
  } catch (const std::exception& e) {
    err_of(env) << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

// Dry runs never touch the configured backend: every prompt is answered with
// its own source sentence.
class EchoStub : public TranslationBackend {
 public:
  BackendCapabilities capabilities() const override { return {"dry-run", 0, true}; }
  std::string translate(const PromptSpec& prompt) override { return prompt.current_source; }
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::unique_ptr<TranslationBackend> make_backend(const RunConfig& config) {
  switch (config.backend.kind) {
    case BackendKind::identity: return std::make_unique<IdentityBackend>();
    case BackendKind::table: return std::make_unique<TableBackend>(TableBackend::load(config.backend.file));
    case BackendKind::scripted: return ScriptedBackend::load(config.backend.file);
    case BackendKind::http: return std::make_unique<HttpBackend>(config.backend.endpoint);
  }
  throw ConfigError("unknown backend kind");
}

Corpus load_corpus(const RunConfig& config) {
  if (config.corpus.format == CorpusFormat::records) {
    if (config.corpus.records.empty()) throw ConfigError("config key 'corpus.records' is not set");
    return load_records(config.corpus.records);
  }
  if (config.corpus.source_lines.empty()) throw ConfigError("config key 'corpus.source_lines' is not set");
  return load_line_aligned(config.corpus.source_lines, config.corpus.target_lines, config.corpus.boundary_marker);
}

int cmd_validate(const RunConfig& config, const CliEnvironment& env) {
  return guarded(env, [&] {
    const Corpus corpus = load_corpus(config);
    const auto report = validate(corpus);
    for (const auto& v : report.violations) out_of(env) << v.to_string() << '\n';
    if (!report.ok()) {
      err_of(env) << "error: " << report.violations.size() << " violation(s)\n";
      return kExitConfig;
    }
    out_of(env) << "ok: " << corpus.documents.size() << " documents, " << corpus.sentence_count() << " sentences, "
                << (corpus.is_parallel() ? "parallel" : "monolingual") << '\n';
    return kExitOk;
  });
}

int cmd_prepare(const std::string& stage, const RunConfig& config, const CliEnvironment& env) {
  return guarded(env, [&] {
    const Corpus corpus = checked_corpus(config, env);
    auto& out = out_of(env);
    if (stage == "1") {
      const auto units = build_stage1_paragraphs(corpus, config.stage1_side, config.stage1_budget);
      const auto over = std::count_if(units.begin(), units.end(), [](const ParagraphUnit& u) { return u.over_budget; });
      const fs::path path = config.output_dir / "stage1.jsonl";
      io::write_file(path, format_stage1(units));
      out << "stage 1: " << units.size() << " units (" << over << " over budget) -> " << path.string() << '\n';
    } else if (stage == "2") {
      const auto docs = build_stage2_documents(corpus, config.stage2_budget);
      std::vector<InterlinearDocument> plain;
      std::size_t pairs = 0;
      for (const auto& d : docs) {
        pairs += d.document.pairs.size();
        plain.push_back(d.document);
      }
      const fs::path path = config.output_dir / "stage2.txt";
      io::write_file(path, format_interlinear_file(plain));
      out << "stage 2: " << docs.size() << " documents, " << pairs << " pairs -> " << path.string() << '\n';
    } else if (stage == "3") {
      if (!corpus.is_parallel()) throw StageDataError("parallel corpus required");
      std::optional<ExemplarIndex> index;
      if (config.decoding.exemplar_source == ExemplarSource::external) {
        index = external_index(config);
        if (!index) index = ExemplarIndex::build(pool_entries(corpus), config.decoding.max_keywords);
      }
      const auto records = build_stage3_instructions(corpus, config.decoding, index ? &*index : nullptr);
      const fs::path path = config.output_dir / "stage3.jsonl";
      io::write_file(path, format_instructions(records));
      out << "stage 3: " << records.size() << " records -> " << path.string() << '\n';
    } else if (stage == "baseline") {
      const auto records = build_sentence_instructions(corpus, config.instruction);
      const fs::path path = config.output_dir / "baseline.jsonl";
      io::write_file(path, format_instructions(records));
      out << "baseline: " << records.size() << " records -> " << path.string() << '\n';
    } else {
      throw ConfigError("unknown stage '" + stage + "' (expected 1, 2, 3 or baseline)");
    }
    return kExitOk;
  });
}

int cmd_translate(const RunConfig& config, bool dry_run, const CliEnvironment& env) {
  return guarded(env, [&] {
    const Corpus corpus = checked_corpus(config, env);
    std::optional<ExemplarIndex> index;
    if (config.decoding.exemplar_source == ExemplarSource::external) {
      index = external_index(config);
      if (!index) throw ConfigError("exemplar_source 'external' needs 'decoding.pool'");
    }
    const ExemplarIndex* index_ptr = index ? &*index : nullptr;
    auto& out = out_of(env);

    if (dry_run) {
      std::mutex mu;
      std::vector<PromptSpec> prompts;
      EchoStub stub;
      run_corpus(corpus, stub, index_ptr, config.decoding, config.parallelism, env.sleeper,
                 [&](const PromptSpec& spec) {
                   std::lock_guard lock(mu);
                   prompts.push_back(spec);
                 });
      std::sort(prompts.begin(), prompts.end(), [](const PromptSpec& a, const PromptSpec& b) {
        return std::tie(a.doc_id, a.seg_index) < std::tie(b.doc_id, b.seg_index);
      });
      std::string body;
      for (const auto& p : prompts) {
        ojson j;
        j["doc_id"] = p.doc_id;
        j["seg_index"] = p.seg_index;
        j["prompt_hash"] = text::fnv1a_hex(p.rendered.flatten());
        j["system"] = p.rendered.system;
        j["user"] = p.rendered.user;
        body += j.dump();
        body += '\n';
      }
      const fs::path path = config.output_dir / "prompts.jsonl";
      io::write_file(path, body);
      out << "dry run: " << prompts.size() << " prompts rendered -> " << path.string() << '\n';
      return kExitOk;
    }

    std::unique_ptr<TranslationBackend> backend;
    try {
      backend = env.backend_factory ? env.backend_factory(config) : make_backend(config);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const CorpusRun run = run_corpus(corpus, *backend, index_ptr, config.decoding, config.parallelism, env.sleeper);

    const fs::path hyp_path = config.output_dir / "hypotheses.jsonl";
    const fs::path manifest_path = config.output_dir / "manifest.json";
    io::write_file(hyp_path, format_hypotheses(to_hypothesis_records(run.documents)));
    io::write_file(manifest_path, manifest_json(run.manifest, config.effective).dump(2) + "\n");

    const auto& m = run.manifest;
    out << "translated " << m.completed_documents << "/" << m.documents << " documents, " << m.sentences
        << " sentences (" << m.failed_sentences << " failed) -> " << hyp_path.string() << '\n';
    for (const auto& [doc, reason] : m.aborted) err_of(env) << "  aborted " << doc << ": " << reason << '\n';
    return m.aborted.empty() ? kExitOk : kExitPartial;
  });
}

int cmd_evaluate(const std::string& hyp_path, const std::string& ref_path, const RunConfig& config,
                 const CliEnvironment& env) {
  return guarded(env, [&] {
    fs::path hyps = hyp_path;
    if (hyps.empty()) hyps = config.hypotheses;
    if (hyps.empty()) hyps = config.output_dir / "hypotheses.jsonl";
    fs::path refs = ref_path;
    if (refs.empty()) refs = config.references;

    const auto system = load_hypotheses(hyps);
    const Corpus references = refs.empty() ? load_corpus(config) : load_records(refs);

    const BleuReport s = s_bleu(system, references, config.metrics);
    const BleuReport d = d_bleu(system, references, config.metrics);
    io::write_file(config.output_dir / "sbleu.json", to_json(s, config.metrics).dump(2) + "\n");
    io::write_file(config.output_dir / "dbleu.json", to_json(d, config.metrics).dump(2) + "\n");

    auto& out = out_of(env);
    out << "metric  score   BP     hyp_len  ref_len\n";
    for (const auto* r : {&s, &d}) {
      std::string row = r == &s ? "s-BLEU  " : "d-BLEU  ";
      std::string score = r->formatted_score();
      row += score + std::string(8 - std::min<std::size_t>(score.size(), 7), ' ');
      row += fixed(r->brevity_penalty, 3) + "  ";
      std::string hl = std::to_string(r->hyp_length);
      row += hl + std::string(9 - std::min<std::size_t>(hl.size(), 8), ' ');
      row += std::to_string(r->ref_length);
      out << row << '\n';
    }
    return kExitOk;
  });
}

int run_cli(const std::vector<std::string>& args, const CliEnvironment& env) {
  CLI::App app{"Document-level literary translation toolkit", "litmt"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--set", sets, "Override a config value, KEY=VALUE with dotted keys")->take_all();

  auto* validate_cmd = app.add_subcommand("validate", "Check corpus structure");
  auto* prepare_cmd = app.add_subcommand("prepare", "Write training data for one stage");
  std::string stage;
  prepare_cmd->add_option("--stage", stage, "1, 2, 3 or baseline")
      ->required()
      ->check(CLI::IsMember({"1", "2", "3", "baseline"}));
  auto* translate_cmd = app.add_subcommand("translate", "Translate the corpus incrementally");
  bool dry_run = false;
  translate_cmd->add_flag("--dry-run", dry_run, "Render prompts without calling the backend");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score hypotheses with s-BLEU and d-BLEU");
  std::string hyp_path;
  std::string ref_path;
  evaluate_cmd->add_option("--hyp", hyp_path, "Hypothesis records");
  evaluate_cmd->add_option("--ref", ref_path, "Reference corpus records");

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("litmt");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out_of(env), err_of(env));
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig config;
  try {
    if (!out_dir.empty()) sets.push_back("output_dir=" + out_dir);
    config = load_run_config(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path), sets);
  } catch (const std::exception& e) {
    err_of(env) << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (validate_cmd->parsed()) return cmd_validate(config, env);
  if (prepare_cmd->parsed()) return cmd_prepare(stage, config, env);
  if (translate_cmd->parsed()) return cmd_translate(config, dry_run, env);
  if (evaluate_cmd->parsed()) return cmd_evaluate(hyp_path, ref_path, config, env);
  return kExitConfig;
}

}  // namespace litmt
