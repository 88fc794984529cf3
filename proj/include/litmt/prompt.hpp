#pragma once

// Prompt templates and the single renderer shared by incremental decoding
// and Stage 3 instruction generation.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace litmt {

class TemplateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Placeholders: {system}, {context}, {exemplars}, {source} in `prompt`;
/// {src}, {tgt} in the item templates. A block renders as
/// header + items + footer, or as nothing when it has no entries.
struct PromptTemplate {
  std::string system =
      "You are a professional literary translator. Translate Chinese web fiction into fluent English, "
      "keeping names, tone and style consistent across the whole story.";
  std::string prompt =
      "{context}{exemplars}Translate the following sentence into English. Output only the translation.\n"
      "{source}";
  std::string context_header = "Previous sentences and their translations:\n";
  std::string context_item = "{src}\n{tgt}\n";
  std::string context_footer = "\n";
  std::string exemplar_header = "Similar sentences and their translations:\n";
  std::string exemplar_item = "{src}\n{tgt}\n";
  std::string exemplar_footer = "\n";

  /// Throws TemplateError when a required placeholder is missing.
  void check() const;
};

struct ContextEntry {
  std::size_t seg_index = 0;
  std::string source;
  std::string translation;

  bool operator==(const ContextEntry&) const = default;
};

struct ExemplarEntry {
  std::string doc_id;
  std::size_t seg_index = 0;
  std::string source;
  std::string target;
  double score = 0.0;

  bool operator==(const ExemplarEntry&) const = default;
};

struct RenderedPrompt {
  std::string system;  // empty when the template inlines {system}
  std::string user;

  /// Single-message form: system text, a blank line, then the user text.
  std::string flatten() const;

  bool operator==(const RenderedPrompt&) const = default;
};

struct PromptSpec {
  std::string doc_id;
  std::size_t seg_index = 0;
  std::string system_text;
  std::vector<ContextEntry> context_block;
  std::vector<ExemplarEntry> exemplar_block;
  std::string current_source;
  RenderedPrompt rendered;
};

bool has_placeholder(std::string_view tmpl, std::string_view name);

/// Single-pass substitution: text inserted for one placeholder is never
/// scanned again. Unknown {names} are kept verbatim.
std::string render_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values);

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const std::vector<ContextEntry>& context,
                             const std::vector<ExemplarEntry>& exemplars, std::string_view source);

/// The sentence-level prompt: no context, no exemplars.
RenderedPrompt render_plain_prompt(const PromptTemplate& tmpl, std::string_view source);

}  // namespace litmt
