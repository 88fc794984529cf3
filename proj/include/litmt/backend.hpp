#pragma once

// Translation backends: PromptSpec in, hypothesis text out.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "litmt/prompt.hpp"

namespace litmt {

enum class BackendErrorKind { network, protocol, rate_limit, overlong_prompt, empty_output };

const char* to_string(BackendErrorKind kind);
std::optional<BackendErrorKind> parse_backend_error_kind(const std::string& name);

/// rate_limit, network and empty_output are retryable by default.
bool default_retryable(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& detail);
  BackendError(BackendErrorKind kind, bool retryable, const std::string& detail);

  BackendErrorKind kind() const { return kind_; }
  bool retryable() const { return retryable_; }
  const std::string& detail() const { return detail_; }

 private:
  BackendErrorKind kind_;
  bool retryable_;
  std::string detail_;
};

struct BackendCapabilities {
  std::string name;
  std::size_t max_prompt_length = 0;  // bytes of the flattened prompt; 0 = unlimited
  bool supports_system_role = true;
};

/// Implementations must tolerate concurrent translate() calls.
class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  virtual BackendCapabilities capabilities() const = 0;
  /// Returns the raw completion text or throws BackendError.
  virtual std::string translate(const PromptSpec& prompt) = 0;
};

/// Echoes the current source sentence.
class IdentityBackend : public TranslationBackend {
 public:
  BackendCapabilities capabilities() const override;
  std::string translate(const PromptSpec& prompt) override;
};

/// Looks the current source up in a fixed table; misses are protocol errors.
class TableBackend : public TranslationBackend {
 public:
  explicit TableBackend(std::map<std::string, std::string> table);
  /// Line-delimited {"source": ..., "target": ...} records.
  static TableBackend load(const std::filesystem::path& path);

  BackendCapabilities capabilities() const override;
  std::string translate(const PromptSpec& prompt) override;

 private:
  std::map<std::string, std::string> table_;
};

/// Plays back a per-source script of outputs and failures. Calls are counted
/// per (doc_id, seg_index), so concurrent documents replay identically. Once
/// a script is exhausted its last step repeats. Unscripted sources use the
/// fallback script, or are echoed when there is none.
class ScriptedBackend : public TranslationBackend {
 public:
  struct Step {
    std::optional<std::string> text;
    std::optional<BackendErrorKind> error;

    static Step output(std::string t) { return Step{std::move(t), std::nullopt}; }
    static Step fail(BackendErrorKind k) { return Step{std::nullopt, k}; }
  };
  using Script = std::vector<Step>;

  explicit ScriptedBackend(std::map<std::string, Script> scripts, std::optional<Script> fallback = std::nullopt);
  /// Line-delimited {"source": ..., "outputs": [...]} records. Each output is
  /// a string or {"error": "<kind>"}; source "*" sets the fallback script.
  static std::unique_ptr<ScriptedBackend> load(const std::filesystem::path& path);

  BackendCapabilities capabilities() const override;
  std::string translate(const PromptSpec& prompt) override;

  std::size_t calls() const;

 private:
  std::map<std::string, Script> scripts_;
  std::optional<Script> fallback_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::size_t>, std::size_t> counters_;
  std::size_t calls_ = 0;
};

}  // namespace litmt
