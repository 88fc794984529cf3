#include "litmt/backend.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "litmt/io.hpp"
#include "litmt/text.hpp"

namespace litmt {

const char* to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::network:
      return "network";
    case BackendErrorKind::protocol:
      return "protocol";
    case BackendErrorKind::rate_limit:
      return "rate_limit";
    case BackendErrorKind::overlong_prompt:
      return "overlong_prompt";
    case BackendErrorKind::empty_output:
      return "empty_output";
  }
  return "unknown";
}

std::optional<BackendErrorKind> parse_backend_error_kind(const std::string& name) {
  for (auto k : {BackendErrorKind::network, BackendErrorKind::protocol, BackendErrorKind::rate_limit,
                 BackendErrorKind::overlong_prompt, BackendErrorKind::empty_output})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

bool default_retryable(BackendErrorKind kind) {
  return kind == BackendErrorKind::network || kind == BackendErrorKind::rate_limit ||
         kind == BackendErrorKind::empty_output;
}

BackendError::BackendError(BackendErrorKind kind, const std::string& detail)
    : BackendError(kind, default_retryable(kind), detail) {}

BackendError::BackendError(BackendErrorKind kind, bool retryable, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      retryable_(retryable),
      detail_(detail) {}

BackendCapabilities IdentityBackend::capabilities() const { return {"identity", 0, true}; }

std::string IdentityBackend::translate(const PromptSpec& prompt) { return prompt.current_source; }

TableBackend::TableBackend(std::map<std::string, std::string> table) : table_(std::move(table)) {}

namespace {

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn fn) {
  std::istringstream in(io::read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

TableBackend TableBackend::load(const std::filesystem::path& path) {
  std::map<std::string, std::string> table;
  for_each_json_line(path, [&](const nlohmann::json& j) {
    table[j.at("source").get<std::string>()] = j.at("target").get<std::string>();
  });
  return TableBackend(std::move(table));
}

BackendCapabilities TableBackend::capabilities() const { return {"table", 0, true}; }

std::string TableBackend::translate(const PromptSpec& prompt) {
  const auto it = table_.find(prompt.current_source);
  if (it == table_.end()) throw BackendError(BackendErrorKind::protocol, "no table entry for source");
  return it->second;
}

ScriptedBackend::ScriptedBackend(std::map<std::string, Script> scripts, std::optional<Script> fallback)
    : scripts_(std::move(scripts)), fallback_(std::move(fallback)) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::load(const std::filesystem::path& path) {
  std::map<std::string, Script> scripts;
  std::optional<Script> fallback;
  for_each_json_line(path, [&](const nlohmann::json& j) {
    Script script;
    for (const auto& out : j.at("outputs")) {
      if (out.is_string()) {
        script.push_back(Step::output(out.get<std::string>()));
      } else {
        const auto name = out.at("error").get<std::string>();
        const auto kind = parse_backend_error_kind(name);
        if (!kind) throw std::runtime_error("unknown error kind '" + name + "' in " + path.string());
        script.push_back(Step::fail(*kind));
      }
    }
    if (script.empty()) throw std::runtime_error("empty script in " + path.string());
    const auto source = j.at("source").get<std::string>();
    if (source == "*")
      fallback = std::move(script);
    else
      scripts[source] = std::move(script);
  });
  return std::make_unique<ScriptedBackend>(std::move(scripts), std::move(fallback));
}

BackendCapabilities ScriptedBackend::capabilities() const { return {"scripted", 0, true}; }

std::string ScriptedBackend::translate(const PromptSpec& prompt) {
  const Script* script = nullptr;
  if (auto it = scripts_.find(prompt.current_source); it != scripts_.end())
    script = &it->second;
  else if (fallback_)
    script = &*fallback_;

  std::size_t call = 0;
  {
    std::lock_guard lock(mu_);
    ++calls_;
    call = counters_[{prompt.doc_id, prompt.seg_index}]++;
  }
  if (!script) return prompt.current_source;
  const Step& step = (*script)[std::min(call, script->size() - 1)];
  if (step.error) throw BackendError(*step.error, "scripted failure");
  return *step.text;
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace litmt
