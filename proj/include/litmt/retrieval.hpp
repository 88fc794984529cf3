#pragma once

// Style-exemplar retrieval: tf-idf cosine blended with keyword Jaccard overlap.

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace litmt {

/// Sparse term-weight vector, sorted by term.
using TermVector = std::vector<std::pair<std::string, double>>;

/// Lowercased whitespace words, with unsegmented scripts split into single
/// characters.
std::vector<std::string> tokenize_terms(std::string_view sentence);

struct PoolEntry {
  std::string source;
  std::string target;
  std::string doc_id;
  std::size_t seg_index = 0;
};

struct Exemplar {
  std::size_t exemplar_id = 0;
  std::string doc_id;
  std::size_t seg_index = 0;
  std::string source;
  std::string target;
  std::vector<std::string> keywords;  // sorted
  TermVector term_weights;
  double squared_norm = 0.0;
};

struct SimilarityScore {
  double combined = 0.0;
  double lexical = 0.0;
  double keyword = 0.0;
};

struct RetrievalConfig {
  double alpha = 0.5;
};

/// Returns true for (doc_id, seg_index) pairs that must not be retrieved.
using ExcludePredicate = std::function<bool(const std::string& doc_id, std::size_t seg_index)>;

class ExemplarIndex {
 public:
  ExemplarIndex() = default;

  /// Builds weights with idf = ln((1 + N) / (1 + df)) + 1 over the whole
  /// pool, then extracts each exemplar's keywords against that table.
  static ExemplarIndex build(const std::vector<PoolEntry>& pool, std::size_t max_keywords = 5);

  std::size_t total_docs() const { return exemplars_.size(); }
  std::size_t max_keywords() const { return max_keywords_; }
  const std::vector<Exemplar>& exemplars() const { return exemplars_; }
  const std::map<std::string, std::size_t>& document_frequency() const { return df_; }

  double idf(const std::string& term) const;
  TermVector weigh(std::string_view sentence) const;

  /// Up to m terms of the sentence with the highest tf-idf weight, in rank
  /// order; ties go to the earlier first occurrence.
  std::vector<std::string> extract_keywords(std::string_view sentence, std::size_t m) const;

  SimilarityScore similarity(std::string_view query, const Exemplar& ex, const RetrievalConfig& cfg) const;

  /// The k best exemplars with combined score > 0 that are not excluded,
  /// best first; ties ordered by (doc_id, seg_index).
  std::vector<std::pair<const Exemplar*, SimilarityScore>> top_k(std::string_view query, std::size_t k,
                                                                 const ExcludePredicate& exclude,
                                                                 const RetrievalConfig& cfg) const;

 private:
  struct Query {
    TermVector weights;
    double squared_norm = 0.0;
    std::vector<std::string> keywords;  // sorted
  };
  Query prepare(std::string_view query) const;
  static SimilarityScore score(const Query& q, const Exemplar& ex, const RetrievalConfig& cfg);

  std::vector<Exemplar> exemplars_;
  std::map<std::string, std::size_t> df_;
  std::map<std::string, std::vector<std::size_t>> postings_;
  std::size_t max_keywords_ = 5;
};

/// Cosine from squared norms; 0 when either vector is all-zero.
double cosine(const TermVector& a, double sq_norm_a, const TermVector& b, double sq_norm_b);
/// 0 when both sets are empty. Inputs must be sorted.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace litmt
