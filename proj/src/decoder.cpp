#include "litmt/decoder.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "litmt/text.hpp"

namespace litmt {

const char* to_string(FallbackPolicy p) { return p == FallbackPolicy::abort ? "abort" : "copy_source"; }
const char* to_string(ExemplarSource s) { return s == ExemplarSource::external ? "external" : "prefix"; }

void DecodingConfig::check() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (max_keywords == 0) throw std::invalid_argument("max_keywords must be >= 1");
  if (backoff_initial.count() < 0) throw std::invalid_argument("backoff_initial must be >= 0");
  if (!(backoff_factor >= 1.0)) throw std::invalid_argument("backoff_factor must be >= 1");
  templates.check();
}

void DecodingState::append(std::string source, std::string hypothesis) {
  history.push_back(ContextEntry{cursor, std::move(source), std::move(hypothesis)});
  ++cursor;
}

ExcludePredicate no_future_filter(const std::string& doc_id, std::size_t seg_index) {
  return [doc_id, seg_index](const std::string& d, std::size_t s) { return d == doc_id && s >= seg_index; };
}

std::vector<ExemplarEntry> retrieve_exemplars(const ExemplarIndex& index, std::string_view source,
                                              const std::string& doc_id, std::size_t seg_index, std::size_t k,
                                              double alpha) {
  std::vector<ExemplarEntry> out;
  for (const auto& [ex, score] : index.top_k(source, k, no_future_filter(doc_id, seg_index), RetrievalConfig{alpha}))
    out.push_back(ExemplarEntry{ex->doc_id, ex->seg_index, ex->source, ex->target, score.combined});
  return out;
}

void PrefixPool::add(PoolEntry entry) {
  entries_.push_back(std::move(entry));
  stale_ = true;
}

const ExemplarIndex& PrefixPool::index() {
  if (stale_) {
    index_ = ExemplarIndex::build(entries_, max_keywords_);
    stale_ = false;
  }
  return index_;
}

PromptSpec build_prompt(const DecodingState& state, std::string_view source, std::vector<ExemplarEntry> exemplars,
                        const DecodingConfig& config) {
  PromptSpec spec;
  spec.doc_id = state.doc_id;
  spec.seg_index = state.cursor;
  spec.system_text = config.templates.system;
  spec.current_source = std::string(source);

  const std::size_t take = std::min(config.history, state.history.size());
  spec.context_block.assign(state.history.end() - static_cast<std::ptrdiff_t>(take), state.history.end());

  std::erase_if(exemplars, [&](const ExemplarEntry& e) {
    return e.doc_id == state.doc_id && e.seg_index >= state.cursor;
  });
  if (exemplars.size() > config.exemplars) exemplars.resize(config.exemplars);
  spec.exemplar_block = std::move(exemplars);

  spec.rendered = render_prompt(config.templates, spec.context_block, spec.exemplar_block, spec.current_source);
  return spec;
}

namespace {

struct QuotePair {
  char32_t open;
  char32_t close;
};

constexpr QuotePair kQuotes[] = {
    {U'"', U'"'}, {U'\'', U'\''}, {U'“', U'”'}, {U'‘', U'’'},
    {U'「', U'」'}, {U'『', U'』'}, {U'«', U'»'},
};

bool is_open_quote(char32_t cp) {
  return std::any_of(std::begin(kQuotes), std::end(kQuotes), [&](const QuotePair& q) { return q.open == cp; });
}

}  // namespace

std::string postprocess_hypothesis(std::string_view raw, std::string_view source) {
  // Fold each line break, with the blanks around it, into one space.
  std::string folded;
  folded.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '\n' || c == '\r') {
      while (!folded.empty() && (folded.back() == ' ' || folded.back() == '\t')) folded.pop_back();
      while (i + 1 < raw.size() &&
             (raw[i + 1] == '\n' || raw[i + 1] == '\r' || raw[i + 1] == ' ' || raw[i + 1] == '\t'))
        ++i;
      folded += ' ';
    } else {
      folded += c;
    }
  }
  std::string out(text::trim(folded));

  const auto src_cps = text::decode_utf8(text::trim(source));
  const bool source_quoted = !src_cps.empty() && is_open_quote(src_cps.front());
  if (!source_quoted) {
    auto cps = text::decode_utf8(out);
    if (cps.size() >= 2) {
      for (const auto& q : kQuotes) {
        if (cps.front() == q.open && cps.back() == q.close) {
          out = std::string(text::trim(text::encode_utf8({cps.begin() + 1, cps.end() - 1})));
          break;
        }
      }
    }
  }
  return out;
}

std::vector<std::string> DocumentTranslation::hypotheses() const {
  std::vector<std::string> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.hypothesis);
  return out;
}

void default_sleeper(std::chrono::milliseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

DocumentTranslation translate_document(const Document& doc, TranslationBackend& backend, const ExemplarIndex* index,
                                       const DecodingConfig& config, const Sleeper& sleeper,
                                       const PromptObserver& observer) {
  config.check();
  DocumentTranslation result;
  result.doc_id = doc.doc_id;

  DecodingState state;
  state.doc_id = doc.doc_id;
  PrefixPool pool(config.max_keywords);
  const bool use_prefix = config.exemplar_source == ExemplarSource::prefix;

  for (const auto& pair : doc.pairs()) {
    if (pair.seg_index != state.cursor)
      throw std::invalid_argument("document " + doc.doc_id + " is not contiguous at seg_index " +
                                  std::to_string(pair.seg_index));

    std::vector<ExemplarEntry> exemplars;
    if (config.exemplars > 0) {
      const ExemplarIndex* source_index = use_prefix ? &pool.index() : index;
      if (source_index)
        exemplars = retrieve_exemplars(*source_index, pair.source, doc.doc_id, pair.seg_index, config.exemplars,
                                       config.alpha);
    }
    const PromptSpec spec = build_prompt(state, pair.source, std::move(exemplars), config);
    if (observer) observer(spec);

    SentenceTrace trace;
    trace.seg_index = pair.seg_index;
    trace.source = pair.source;
    trace.prompt_hash = text::fnv1a_hex(spec.rendered.flatten());
    for (const auto& e : spec.exemplar_block) trace.exemplars.push_back(ExemplarRef{e.doc_id, e.seg_index});

    std::optional<std::string> hypothesis;
    auto delay = config.backoff_initial;
    const std::size_t max_attempts = config.retry + 1;
    while (trace.attempts < max_attempts) {
      ++trace.attempts;
      bool retryable = false;
      try {
        auto hyp = postprocess_hypothesis(backend.translate(spec), pair.source);
        if (hyp.empty()) throw BackendError(BackendErrorKind::empty_output, "empty after post-processing");
        hypothesis = std::move(hyp);
        break;
      } catch (const BackendError& e) {
        trace.errors.emplace_back(e.what());
        retryable = e.retryable();
      } catch (const std::exception& e) {
        trace.errors.emplace_back(std::string("backend exception: ") + e.what());
      }
      if (!retryable || trace.attempts >= max_attempts) break;
      sleeper(delay);
      delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * config.backoff_factor));
    }

    if (hypothesis) {
      trace.hypothesis = *hypothesis;
      if (use_prefix) pool.add(PoolEntry{pair.source, *hypothesis, doc.doc_id, pair.seg_index});
    } else if (config.fallback == FallbackPolicy::abort) {
      result.aborted = true;
      result.abort_reason = "seg " + std::to_string(pair.seg_index) + ": " +
                            (trace.errors.empty() ? std::string("no attempts") : trace.errors.back());
      trace.failed = true;
      result.sentences.push_back(std::move(trace));
      break;
    } else {
      trace.hypothesis = pair.source;
      trace.failed = true;
    }
    state.append(pair.source, trace.hypothesis);
    result.sentences.push_back(std::move(trace));
  }
  return result;
}

namespace {

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

CorpusRun run_corpus(const Corpus& corpus, TranslationBackend& backend, const ExemplarIndex* index,
                     const DecodingConfig& config, std::size_t parallelism, const Sleeper& sleeper,
                     const PromptObserver& observer) {
  if (parallelism == 0) throw std::invalid_argument("parallelism must be >= 1");
  config.check();

  CorpusRun run;
  run.manifest.started = utc_timestamp(std::chrono::system_clock::now());
  run.manifest.parallelism = parallelism;
  run.manifest.backend = backend.capabilities().name;
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<const Document*> docs;
  for (const auto& d : corpus.documents) docs.push_back(&d);
  std::stable_sort(docs.begin(), docs.end(), [](const Document* a, const Document* b) { return a->doc_id < b->doc_id; });

  std::vector<DocumentTranslation> results(docs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < docs.size(); i = next++) {
      try {
        results[i] = translate_document(*docs[i], backend, index, config, sleeper, observer);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(parallelism, std::max<std::size_t>(docs.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  auto& m = run.manifest;
  m.documents = results.size();
  for (const auto& r : results) {
    if (r.aborted)
      m.aborted.emplace_back(r.doc_id, r.abort_reason);
    else
      ++m.completed_documents;
    for (const auto& s : r.sentences) {
      ++m.sentences;
      if (s.failed) ++m.failed_sentences;
      m.backend_attempts += s.attempts;
    }
  }
  m.finished = utc_timestamp(std::chrono::system_clock::now());
  m.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.documents = std::move(results);
  return run;
}

std::vector<HypothesisRecord> to_hypothesis_records(const std::vector<DocumentTranslation>& docs) {
  std::vector<HypothesisRecord> out;
  for (const auto& d : docs) {
    if (d.aborted) continue;
    for (const auto& s : d.sentences) out.push_back(HypothesisRecord{d.doc_id, s.seg_index, s.source, s.hypothesis, s.failed});
  }
  return out;
}

}  // namespace litmt
