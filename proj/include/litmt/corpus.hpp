#pragma once

// Document-structured bilingual corpora: novel -> chapter -> sentence pair.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace litmt {

struct SentencePair {
  std::string doc_id;
  std::string chapter_id;
  std::size_t seg_index = 0;
  std::string source;
  std::optional<std::string> target;

  bool operator==(const SentencePair&) const = default;
};

struct Chapter {
  std::string chapter_id;
  std::vector<SentencePair> pairs;

  bool operator==(const Chapter&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<Chapter> chapters;

  std::size_t size() const;
  /// All pairs across chapters, in seg_index order.
  std::vector<SentencePair> pairs() const;

  bool operator==(const Document&) const = default;
};

struct CorpusMetadata {
  std::string language_pair;
  std::string source_name;

  bool operator==(const CorpusMetadata&) const = default;
};

struct Corpus {
  std::vector<Document> documents;
  CorpusMetadata metadata;

  /// True when every pair carries a target. An empty corpus is parallel.
  bool is_parallel() const;
  std::size_t sentence_count() const;
  const Document* find(const std::string& doc_id) const;
};

/// Raised by the loaders. line is 1-based; 0 when no single line is at fault.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Violation {
  std::string doc_id;
  std::string chapter_id;
  std::optional<std::size_t> seg_index;
  std::string message;

  std::string to_string() const;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Reads line-delimited JSON records (doc_id, chapter_id?, seg_index?,
/// source, target?). Documents come back ordered by doc_id and pairs by
/// seg_index, so any permutation of an indexed file loads identically.
/// When seg_index is absent it is assigned from file order.
Corpus load_records(const std::filesystem::path& path);
Corpus parse_records(const std::string& content, const std::string& source_name = {});

void write_records(const Corpus& corpus, const std::filesystem::path& path);
std::string format_records(const Corpus& corpus);

/// One sentence per line; lines equal to boundary_marker split documents.
/// tgt_path may be empty for monolingual data.
Corpus load_line_aligned(const std::filesystem::path& src_path,
                         const std::filesystem::path& tgt_path,
                         const std::string& boundary_marker = "");

ValidationReport validate(const Corpus& corpus);

}  // namespace litmt
