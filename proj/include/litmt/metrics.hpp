#pragma once

// Corpus BLEU compatible with sacreBLEU's defaults (13a tokenization,
// exponential smoothing, no effective order), plus sentence- and
// document-segmented variants.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "litmt/corpus.hpp"
#include "litmt/hypotheses.hpp"

namespace litmt {

enum class Smoothing { none, exp_floor };
enum class BleuTokenization { intl13a, character };
enum class Segmentation { sentence, document };

const char* to_string(Smoothing s);
const char* to_string(BleuTokenization t);
const char* to_string(Segmentation s);

struct BleuConfig {
  std::size_t max_order = 4;
  Smoothing smoothing = Smoothing::exp_floor;
  BleuTokenization tokenization = BleuTokenization::intl13a;
  bool lowercase = false;

  void check() const;
};

struct BleuReport {
  double score = 0.0;              // [0, 100]
  std::vector<double> precisions;  // smoothed, as fractions
  double brevity_penalty = 0.0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
  std::vector<std::size_t> correct;
  std::vector<std::size_t> total;
  Segmentation segmentation = Segmentation::sentence;

  /// Two decimals, e.g. "66.87".
  std::string formatted_score() const;
};

std::vector<std::string> tokenize(std::string_view text, BleuTokenization mode);

/// Throws std::invalid_argument on empty input or mismatched lengths.
BleuReport corpus_bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                       const BleuConfig& config = {});

class AlignmentError : public std::runtime_error {
 public:
  explicit AlignmentError(std::vector<std::string> gaps);
  const std::vector<std::string>& gaps() const { return gaps_; }

 private:
  std::vector<std::string> gaps_;
};

/// Hypotheses and references paired by (doc_id, seg_index), in reference
/// order. Throws AlignmentError listing every missing, extra or untranslated
/// entry.
struct AlignedDocument {
  std::string doc_id;
  std::vector<std::string> hypotheses;
  std::vector<std::string> references;
};
std::vector<AlignedDocument> align(const std::vector<HypothesisRecord>& system, const Corpus& references);

BleuReport s_bleu(const std::vector<HypothesisRecord>& system, const Corpus& references, const BleuConfig& config = {});

/// Each document's sentences joined by single spaces form one segment.
BleuReport d_bleu(const std::vector<HypothesisRecord>& system, const Corpus& references, const BleuConfig& config = {});

nlohmann::ordered_json to_json(const BleuReport& report, const BleuConfig& config);

}  // namespace litmt
