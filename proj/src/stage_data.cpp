#include "litmt/stage_data.hpp"

#include <json.hpp>

#include "litmt/prompt.hpp"
#include "litmt/text.hpp"

namespace litmt {

namespace {

const TokenCounter& counter_or_default(const TokenCounter& tokenizer) {
  static const TokenCounter fallback = [](std::string_view s) { return text::count_tokens(s); };
  return tokenizer ? tokenizer : fallback;
}

void require_parallel(const Corpus& corpus) {
  if (!corpus.is_parallel()) throw StageDataError("parallel corpus required");
}

bool has_line_break(std::string_view s) { return s.find_first_of("\r\n") != std::string_view::npos; }

}  // namespace

std::vector<ParagraphUnit> build_stage1_paragraphs(const Corpus& corpus, Side side, std::size_t budget,
                                                   const TokenCounter& tokenizer,
                                                   const std::optional<std::string>& joiner) {
  const auto& count = counter_or_default(tokenizer);
  std::vector<ParagraphUnit> units;
  for (const auto& doc : corpus.documents) {
    for (const auto& ch : doc.chapters) {
      std::vector<const std::string*> sentences;
      std::string whole;
      for (const auto& p : ch.pairs) {
        if (side == Side::target && !p.target)
          throw StageDataError("target side requested but document " + doc.doc_id + " seg " +
                               std::to_string(p.seg_index) + " has no target");
        sentences.push_back(side == Side::source ? &p.source : &*p.target);
        whole += *sentences.back();
      }
      const std::string glue = joiner ? *joiner : (text::is_predominantly_unsegmented(whole) ? "" : " ");

      std::optional<ParagraphUnit> open;
      auto flush = [&] {
        if (open) units.push_back(std::move(*open));
        open.reset();
      };
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        const std::size_t seg = ch.pairs[i].seg_index;
        const std::size_t tokens = count(*sentences[i]);
        if (open && open->token_count + tokens > budget) flush();
        if (!open) {
          open = ParagraphUnit{doc.doc_id, ch.chapter_id, *sentences[i], tokens, tokens > budget, seg, seg};
          if (open->over_budget) flush();
          continue;
        }
        open->text += glue;
        open->text += *sentences[i];
        open->token_count += tokens;
        open->last_seg = seg;
      }
      flush();
    }
  }
  return units;
}

std::string format_stage1(const std::vector<ParagraphUnit>& units) {
  std::string out;
  for (const auto& u : units) {
    nlohmann::ordered_json j;
    j["doc_id"] = u.doc_id;
    j["chapter_id"] = u.chapter_id;
    j["text"] = u.text;
    j["token_count"] = u.token_count;
    j["over_budget"] = u.over_budget;
    out += j.dump();
    out += '\n';
  }
  return out;
}

InterlinearParseError::InterlinearParseError(const std::string& what, std::size_t line)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

constexpr std::string_view kSrcTag = "<src> ";
constexpr std::string_view kTgtTag = "<tgt> ";

void check_interlinear_text(std::string_view s, const char* side) {
  if (s.empty()) throw std::invalid_argument(std::string("interlinear ") + side + " text is empty");
  if (has_line_break(s)) throw std::invalid_argument(std::string("interlinear ") + side + " text contains a line break");
}

// Splits on '\n'; a trailing newline does not open an extra line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

InterlinearDocument parse_lines(const std::vector<std::string_view>& lines, std::size_t first_line,
                                const std::string& doc_id) {
  InterlinearDocument doc;
  doc.doc_id = doc_id;
  std::optional<std::string> pending;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = first_line + i;
    const std::string_view line = lines[i];
    if (line.substr(0, kSrcTag.size()) == kSrcTag) {
      if (pending) throw InterlinearParseError("tag mismatch: two consecutive <src> lines", line_no);
      pending = std::string(line.substr(kSrcTag.size()));
      if (pending->empty()) throw InterlinearParseError("empty source text", line_no);
    } else if (line.substr(0, kTgtTag.size()) == kTgtTag) {
      if (!pending) {
        if (doc.pairs.empty()) throw InterlinearParseError("target before source", line_no);
        throw InterlinearParseError("tag mismatch: two consecutive <tgt> lines", line_no);
      }
      std::string target(line.substr(kTgtTag.size()));
      if (target.empty()) throw InterlinearParseError("empty target text", line_no);
      doc.pairs.push_back(InterlinearPair{std::move(*pending), std::move(target)});
      pending.reset();
    } else if (line.empty()) {
      throw InterlinearParseError("unexpected blank line", line_no);
    } else {
      throw InterlinearParseError("unknown tag", line_no);
    }
  }
  if (pending) throw InterlinearParseError("trailing unpaired source line", first_line + lines.size() - 1);
  return doc;
}

}  // namespace

std::string format_interlinear(const InterlinearDocument& doc) {
  std::string out;
  for (const auto& p : doc.pairs) {
    check_interlinear_text(p.source, "source");
    check_interlinear_text(p.target, "target");
    out += kSrcTag;
    out += p.source;
    out += '\n';
    out += kTgtTag;
    out += p.target;
    out += '\n';
  }
  return out;
}

InterlinearDocument parse_interlinear(std::string_view text, const std::string& doc_id) {
  return parse_lines(split_lines(text), 1, doc_id);
}

std::string format_interlinear_file(const std::vector<InterlinearDocument>& docs) {
  std::string out;
  for (const auto& d : docs) {
    if (d.pairs.empty()) continue;
    if (!out.empty()) out += '\n';
    out += format_interlinear(d);
  }
  return out;
}

std::vector<InterlinearDocument> parse_interlinear_file(std::string_view text) {
  std::vector<InterlinearDocument> docs;
  const auto lines = split_lines(text);
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= lines.size(); ++i) {
    if (i == lines.size() || lines[i].empty()) {
      if (i > begin) docs.push_back(parse_lines({lines.begin() + begin, lines.begin() + i}, begin + 1, {}));
      else if (i < lines.size()) throw InterlinearParseError("unexpected blank line", i + 1);
      begin = i + 1;
    }
  }
  return docs;
}

std::vector<Stage2Document> build_stage2_documents(const Corpus& corpus, std::size_t budget,
                                                   const TokenCounter& tokenizer) {
  require_parallel(corpus);
  const auto& count = counter_or_default(tokenizer);
  std::vector<Stage2Document> out;
  for (const auto& doc : corpus.documents) {
    std::optional<Stage2Document> open;
    auto flush = [&] {
      if (open) out.push_back(std::move(*open));
      open.reset();
    };
    for (const auto& p : doc.pairs()) {
      if (has_line_break(p.source) || has_line_break(*p.target))
        throw StageDataError("document " + doc.doc_id + " seg " + std::to_string(p.seg_index) +
                             " contains a line break");
      const std::size_t tokens = count(p.source) + count(*p.target);
      if (open && open->token_count + tokens > budget) flush();
      if (!open) {
        open = Stage2Document{InterlinearDocument{doc.doc_id, {}}, 0, tokens > budget, p.seg_index};
      }
      open->document.pairs.push_back(InterlinearPair{p.source, *p.target});
      open->token_count += tokens;
      if (open->over_budget) flush();
    }
    flush();
  }
  return out;
}

void InstructionTemplate::check() const {
  if (!has_placeholder(text, "source")) throw TemplateError("instruction template lacks {source}");
}

std::vector<InstructionRecord> build_sentence_instructions(const Corpus& corpus, const InstructionTemplate& tmpl) {
  tmpl.check();
  require_parallel(corpus);
  std::vector<InstructionRecord> out;
  for (const auto& doc : corpus.documents)
    for (const auto& p : doc.pairs())
      out.push_back(InstructionRecord{render_placeholders(tmpl.text, {{"source", p.source}}), p.source, *p.target});
  return out;
}

std::vector<InstructionRecord> build_stage3_instructions(const Corpus& corpus, const DecodingConfig& config,
                                                         const ExemplarIndex* index) {
  config.check();
  require_parallel(corpus);
  const bool use_prefix = config.exemplar_source == ExemplarSource::prefix;
  std::vector<InstructionRecord> out;
  for (const auto& doc : corpus.documents) {
    DecodingState state;
    state.doc_id = doc.doc_id;
    PrefixPool pool(config.max_keywords);
    for (const auto& p : doc.pairs()) {
      std::vector<ExemplarEntry> exemplars;
      if (config.exemplars > 0) {
        const ExemplarIndex* source_index = use_prefix ? &pool.index() : index;
        if (source_index)
          exemplars = retrieve_exemplars(*source_index, p.source, doc.doc_id, p.seg_index, config.exemplars,
                                         config.alpha);
      }
      const PromptSpec spec = build_prompt(state, p.source, std::move(exemplars), config);
      out.push_back(InstructionRecord{spec.rendered.flatten(), "", *p.target});
      state.append(p.source, *p.target);
      if (use_prefix) pool.add(PoolEntry{p.source, *p.target, doc.doc_id, p.seg_index});
    }
  }
  return out;
}

std::string format_instructions(const std::vector<InstructionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["instruction"] = r.instruction;
    j["input"] = r.input;
    j["output"] = r.output;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace litmt
