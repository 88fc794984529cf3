#include "litmt/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "litmt/text.hpp"

namespace litmt {

std::vector<std::string> tokenize_terms(std::string_view sentence) {
  return text::split_pieces(text::to_lower(sentence));
}

namespace {

struct TermCount {
  std::string term;
  std::size_t count = 0;
  std::size_t first = 0;
};

// Distinct terms with counts, in first-occurrence order.
std::vector<TermCount> count_terms(std::string_view sentence) {
  std::vector<TermCount> out;
  std::unordered_map<std::string, std::size_t> pos;
  const auto terms = tokenize_terms(sentence);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto [it, inserted] = pos.emplace(terms[i], out.size());
    if (inserted) out.push_back(TermCount{terms[i], 0, i});
    ++out[it->second].count;
  }
  return out;
}

double squared_norm(const TermVector& v) {
  double s = 0.0;
  for (const auto& [_, w] : v) s += w * w;
  return s;
}

std::vector<std::string> sorted_copy(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double cosine(const TermVector& a, double sq_norm_a, const TermVector& b, double sq_norm_b) {
  if (sq_norm_a <= 0.0 || sq_norm_b <= 0.0) return 0.0;
  double dot = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  // sqrt(x * x) == x exactly in IEEE arithmetic, so identical vectors give 1.
  return std::clamp(dot / std::sqrt(sq_norm_a * sq_norm_b), 0.0, 1.0);
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

ExemplarIndex ExemplarIndex::build(const std::vector<PoolEntry>& pool, std::size_t max_keywords) {
  ExemplarIndex index;
  index.max_keywords_ = max_keywords;
  index.exemplars_.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& entry = pool[i];
    for (const auto& tc : count_terms(entry.source)) ++index.df_[tc.term];
    Exemplar ex;
    ex.exemplar_id = i;
    ex.doc_id = entry.doc_id;
    ex.seg_index = entry.seg_index;
    ex.source = entry.source;
    ex.target = entry.target;
    index.exemplars_.push_back(std::move(ex));
  }
  for (auto& ex : index.exemplars_) {
    ex.term_weights = index.weigh(ex.source);
    ex.squared_norm = squared_norm(ex.term_weights);
    ex.keywords = sorted_copy(index.extract_keywords(ex.source, max_keywords));
    for (const auto& [term, _] : ex.term_weights) index.postings_[term].push_back(ex.exemplar_id);
  }
  return index;
}

double ExemplarIndex::idf(const std::string& term) const {
  const auto it = df_.find(term);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  const double n = static_cast<double>(exemplars_.size());
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

TermVector ExemplarIndex::weigh(std::string_view sentence) const {
  TermVector v;
  for (const auto& tc : count_terms(sentence)) v.emplace_back(tc.term, static_cast<double>(tc.count) * idf(tc.term));
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::string> ExemplarIndex::extract_keywords(std::string_view sentence, std::size_t m) const {
  auto counts = count_terms(sentence);
  std::vector<std::pair<double, std::size_t>> ranked;  // (weight, first occurrence)
  ranked.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    ranked.emplace_back(static_cast<double>(counts[i].count) * idf(counts[i].term), i);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && out.size() < m; ++i) out.push_back(counts[ranked[i].second].term);
  return out;
}

ExemplarIndex::Query ExemplarIndex::prepare(std::string_view query) const {
  Query q;
  q.weights = weigh(query);
  q.squared_norm = squared_norm(q.weights);
  q.keywords = sorted_copy(extract_keywords(query, max_keywords_));
  return q;
}

SimilarityScore ExemplarIndex::score(const Query& q, const Exemplar& ex, const RetrievalConfig& cfg) {
  SimilarityScore s;
  s.lexical = cosine(q.weights, q.squared_norm, ex.term_weights, ex.squared_norm);
  s.keyword = jaccard(q.keywords, ex.keywords);
  s.combined = cfg.alpha * s.lexical + (1.0 - cfg.alpha) * s.keyword;
  return s;
}

SimilarityScore ExemplarIndex::similarity(std::string_view query, const Exemplar& ex,
                                          const RetrievalConfig& cfg) const {
  return score(prepare(query), ex, cfg);
}

std::vector<std::pair<const Exemplar*, SimilarityScore>> ExemplarIndex::top_k(std::string_view query, std::size_t k,
                                                                             const ExcludePredicate& exclude,
                                                                             const RetrievalConfig& cfg) const {
  std::vector<std::pair<const Exemplar*, SimilarityScore>> scored;
  if (k == 0 || exemplars_.empty()) return scored;

  // Only exemplars sharing a term can score above zero.
  const Query q = prepare(query);
  std::vector<std::size_t> candidates;
  for (const auto& [term, _] : q.weights) {
    const auto it = postings_.find(term);
    if (it != postings_.end()) candidates.insert(candidates.end(), it->second.begin(), it->second.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (std::size_t id : candidates) {
    const Exemplar& ex = exemplars_[id];
    if (exclude && exclude(ex.doc_id, ex.seg_index)) continue;
    const auto s = score(q, ex, cfg);
    if (s.combined > 0.0) scored.emplace_back(&ex, s);
  }

  auto better = [](const auto& a, const auto& b) {
    if (a.second.combined != b.second.combined) return a.second.combined > b.second.combined;
    if (a.first->doc_id != b.first->doc_id) return a.first->doc_id < b.first->doc_id;
    if (a.first->seg_index != b.first->seg_index) return a.first->seg_index < b.first->seg_index;
    return a.first->exemplar_id < b.first->exemplar_id;
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
  scored.resize(keep);
  return scored;
}

}  // namespace litmt
