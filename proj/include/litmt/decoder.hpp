#pragma once

// Incremental decoding: a document is translated sentence by sentence, each
// prompt carrying the previous n translations and the k most similar
// already-translated exemplars.

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "litmt/backend.hpp"
#include "litmt/corpus.hpp"
#include "litmt/hypotheses.hpp"
#include "litmt/prompt.hpp"
#include "litmt/retrieval.hpp"

namespace litmt {

enum class FallbackPolicy { copy_source, abort };
enum class ExemplarSource { prefix, external };

const char* to_string(FallbackPolicy p);
const char* to_string(ExemplarSource s);

struct DecodingConfig {
  std::size_t history = 3;    // n
  std::size_t exemplars = 2;  // k
  double alpha = 0.5;
  std::size_t max_keywords = 5;
  PromptTemplate templates;
  std::size_t retry = 3;  // retries after the first attempt
  std::chrono::milliseconds backoff_initial{1000};
  double backoff_factor = 2.0;
  FallbackPolicy fallback = FallbackPolicy::copy_source;
  /// prefix: exemplars come from this document's already-translated
  /// sentences. external: from the index passed in.
  ExemplarSource exemplar_source = ExemplarSource::prefix;

  /// Throws std::invalid_argument / TemplateError on out-of-range values.
  void check() const;
};

struct DecodingState {
  std::string doc_id;
  std::vector<ContextEntry> history;
  std::size_t cursor = 0;

  void append(std::string source, std::string hypothesis);
};

/// Exemplars may not come from the current sentence or later ones of the same
/// document.
ExcludePredicate no_future_filter(const std::string& doc_id, std::size_t seg_index);

/// top_k under the no-future rule, converted to prompt entries.
std::vector<ExemplarEntry> retrieve_exemplars(const ExemplarIndex& index, std::string_view source,
                                              const std::string& doc_id, std::size_t seg_index, std::size_t k,
                                              double alpha);

/// Exemplar pool grown from a document prefix; the index is rebuilt lazily
/// after each append, leaving any shared index untouched.
class PrefixPool {
 public:
  explicit PrefixPool(std::size_t max_keywords) : max_keywords_(max_keywords) {}

  void add(PoolEntry entry);
  const ExemplarIndex& index();
  std::size_t size() const { return entries_.size(); }

 private:
  std::size_t max_keywords_;
  std::vector<PoolEntry> entries_;
  ExemplarIndex index_;
  bool stale_ = false;
};

/// Context = last min(n, cursor) history entries. Exemplars that violate the
/// no-future rule are dropped.
PromptSpec build_prompt(const DecodingState& state, std::string_view source, std::vector<ExemplarEntry> exemplars,
                        const DecodingConfig& config);

/// Trims whitespace, removes one layer of wrapping quotes (unless the source
/// itself opens with a quote) and folds line breaks into single spaces.
std::string postprocess_hypothesis(std::string_view raw, std::string_view source);

struct ExemplarRef {
  std::string doc_id;
  std::size_t seg_index = 0;

  bool operator==(const ExemplarRef&) const = default;
};

struct SentenceTrace {
  std::size_t seg_index = 0;
  std::string source;
  std::string hypothesis;
  bool failed = false;
  std::size_t attempts = 0;
  std::string prompt_hash;
  std::vector<ExemplarRef> exemplars;
  std::vector<std::string> errors;

  bool operator==(const SentenceTrace&) const = default;
};

struct DocumentTranslation {
  std::string doc_id;
  std::vector<SentenceTrace> sentences;
  bool aborted = false;
  std::string abort_reason;

  std::vector<std::string> hypotheses() const;
  bool operator==(const DocumentTranslation&) const = default;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
void default_sleeper(std::chrono::milliseconds d);

/// Called with every prompt before it is sent; must be thread-safe under
/// run_corpus with parallelism > 1.
using PromptObserver = std::function<void(const PromptSpec&)>;

DocumentTranslation translate_document(const Document& doc, TranslationBackend& backend, const ExemplarIndex* index,
                                       const DecodingConfig& config, const Sleeper& sleeper = default_sleeper,
                                       const PromptObserver& observer = {});

struct RunManifest {
  std::string started;   // ISO-8601 UTC
  std::string finished;
  double elapsed_seconds = 0.0;
  std::size_t parallelism = 1;
  std::string backend;
  std::size_t documents = 0;
  std::size_t completed_documents = 0;
  std::size_t sentences = 0;
  std::size_t failed_sentences = 0;
  std::size_t backend_attempts = 0;
  std::vector<std::pair<std::string, std::string>> aborted;  // (doc_id, reason)
};

struct CorpusRun {
  std::vector<DocumentTranslation> documents;  // ordered by doc_id
  RunManifest manifest;
};

CorpusRun run_corpus(const Corpus& corpus, TranslationBackend& backend, const ExemplarIndex* index,
                     const DecodingConfig& config, std::size_t parallelism, const Sleeper& sleeper = default_sleeper,
                     const PromptObserver& observer = {});

/// Output records for every completed document; aborted documents are left
/// out (the manifest lists them).
std::vector<HypothesisRecord> to_hypothesis_records(const std::vector<DocumentTranslation>& docs);

}  // namespace litmt
