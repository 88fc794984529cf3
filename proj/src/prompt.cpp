#include "litmt/prompt.hpp"

namespace litmt {

bool has_placeholder(std::string_view tmpl, std::string_view name) {
  std::string needle = "{";
  needle += name;
  needle += "}";
  return tmpl.find(needle) != std::string_view::npos;
}

void PromptTemplate::check() const {
  if (!has_placeholder(prompt, "source")) throw TemplateError("prompt template lacks {source}");
  if (!has_placeholder(context_item, "tgt")) throw TemplateError("context item template lacks {tgt}");
  if (!has_placeholder(exemplar_item, "tgt")) throw TemplateError("exemplar item template lacks {tgt}");
}

std::string RenderedPrompt::flatten() const {
  if (system.empty()) return user;
  return system + "\n\n" + user;
}

std::string render_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

namespace {

template <typename Entries, typename Fields>
std::string render_block(const std::string& header, const std::string& item, const std::string& footer,
                         const Entries& entries, Fields fields) {
  if (entries.empty()) return {};
  std::string out = header;
  for (const auto& e : entries) {
    const auto [src, tgt] = fields(e);
    out += render_placeholders(item, {{"src", src}, {"tgt", tgt}});
  }
  out += footer;
  return out;
}

}  // namespace

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const std::vector<ContextEntry>& context,
                             const std::vector<ExemplarEntry>& exemplars, std::string_view source) {
  tmpl.check();
  const std::string context_text =
      render_block(tmpl.context_header, tmpl.context_item, tmpl.context_footer, context,
                   [](const ContextEntry& e) { return std::pair{e.source, e.translation}; });
  const std::string exemplar_text =
      render_block(tmpl.exemplar_header, tmpl.exemplar_item, tmpl.exemplar_footer, exemplars,
                   [](const ExemplarEntry& e) { return std::pair{e.source, e.target}; });

  RenderedPrompt out;
  const bool inline_system = has_placeholder(tmpl.prompt, "system");
  out.user = render_placeholders(tmpl.prompt, {{"system", tmpl.system},
                                               {"context", context_text},
                                               {"exemplars", exemplar_text},
                                               {"source", std::string(source)}});
  if (!inline_system) out.system = tmpl.system;
  return out;
}

RenderedPrompt render_plain_prompt(const PromptTemplate& tmpl, std::string_view source) {
  return render_prompt(tmpl, {}, {}, source);
}

}  // namespace litmt
