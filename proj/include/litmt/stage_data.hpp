#pragma once

// Training-data builders: Stage 1 paragraphs, Stage 2 interlinear documents,
// Stage 3 context/style instructions and the sentence-level baseline.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "litmt/corpus.hpp"
#include "litmt/decoder.hpp"
#include "litmt/retrieval.hpp"

namespace litmt {

using TokenCounter = std::function<std::size_t(std::string_view)>;

enum class Side { source, target };

inline constexpr std::size_t kDefaultStage1Budget = 1024;
inline constexpr std::size_t kDefaultStage2Budget = 1024;

class StageDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stage 1 ---------------------------------------------------------------

struct ParagraphUnit {
  std::string doc_id;
  std::string chapter_id;
  std::string text;
  std::size_t token_count = 0;
  bool over_budget = false;
  std::size_t first_seg = 0;  // inclusive
  std::size_t last_seg = 0;   // inclusive

  bool operator==(const ParagraphUnit&) const = default;
};

/// Packs each chapter's sentences greedily: a unit grows until the next
/// sentence would push it past budget. Units never cross chapters. A single
/// sentence above budget becomes its own unit with over_budget set. The
/// joiner defaults to "" for chapters written mostly in unsegmented script
/// and " " otherwise.
std::vector<ParagraphUnit> build_stage1_paragraphs(const Corpus& corpus, Side side,
                                                   std::size_t budget = kDefaultStage1Budget,
                                                   const TokenCounter& tokenizer = {},
                                                   const std::optional<std::string>& joiner = std::nullopt);

std::string format_stage1(const std::vector<ParagraphUnit>& units);

// Stage 2 ---------------------------------------------------------------

struct InterlinearPair {
  std::string source;
  std::string target;

  bool operator==(const InterlinearPair&) const = default;
};

struct InterlinearDocument {
  std::string doc_id;
  std::vector<InterlinearPair> pairs;

  bool operator==(const InterlinearDocument&) const = default;
};

class InterlinearParseError : public std::runtime_error {
 public:
  InterlinearParseError(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// "<src> TEXT\n<tgt> TEXT\n" per pair. Throws std::invalid_argument for
/// pairs with empty text or embedded line breaks.
std::string format_interlinear(const InterlinearDocument& doc);
InterlinearDocument parse_interlinear(std::string_view text, const std::string& doc_id = {});

/// Non-empty documents joined by one blank line.
std::string format_interlinear_file(const std::vector<InterlinearDocument>& docs);
std::vector<InterlinearDocument> parse_interlinear_file(std::string_view text);

struct Stage2Document {
  InterlinearDocument document;
  std::size_t token_count = 0;
  bool over_budget = false;
  std::size_t first_seg = 0;
};

/// Greedy packing of consecutive pairs; a pair costs its source plus target
/// token count. Documents are never merged.
std::vector<Stage2Document> build_stage2_documents(const Corpus& corpus, std::size_t budget = kDefaultStage2Budget,
                                                   const TokenCounter& tokenizer = {});

// Instructions ----------------------------------------------------------

struct InstructionRecord {
  std::string instruction;
  std::string input;
  std::string output;

  bool operator==(const InstructionRecord&) const = default;
};

struct InstructionTemplate {
  std::string text = "Translate the following Chinese sentence into English.\n{source}";

  void check() const;  // requires {source}
};

std::vector<InstructionRecord> build_sentence_instructions(const Corpus& corpus, const InstructionTemplate& tmpl);

/// One record per pair. The instruction is the flattened decoder prompt built
/// from the previous n pairs (with reference targets) and the top-k
/// exemplars; input is empty and output is the reference target. Exemplars
/// follow config.exemplar_source: the document's preceding pairs, or `index`.
std::vector<InstructionRecord> build_stage3_instructions(const Corpus& corpus, const DecodingConfig& config,
                                                         const ExemplarIndex* index);

std::string format_instructions(const std::vector<InstructionRecord>& records);

}  // namespace litmt
