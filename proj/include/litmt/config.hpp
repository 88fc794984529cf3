#pragma once

// Run configuration: one JSON file plus dotted `key=value` overrides.
// Precedence is overrides > file > built-in defaults.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "litmt/decoder.hpp"
#include "litmt/http_backend.hpp"
#include "litmt/metrics.hpp"
#include "litmt/stage_data.hpp"

namespace litmt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CorpusFormat { records, lines };
enum class BackendKind { identity, table, scripted, http };

const char* to_string(BackendKind kind);

struct CorpusPaths {
  CorpusFormat format = CorpusFormat::records;
  std::filesystem::path records;
  std::filesystem::path source_lines;
  std::filesystem::path target_lines;  // empty: monolingual
  std::string boundary_marker;
};

struct BackendConfig {
  BackendKind kind = BackendKind::identity;
  std::filesystem::path file;  // table / scripted
  EndpointConfig endpoint;     // http
};

struct RunConfig {
  CorpusPaths corpus;
  std::filesystem::path pool;  // external exemplar pool, record format
  std::size_t stage1_budget = kDefaultStage1Budget;
  Side stage1_side = Side::source;
  std::size_t stage2_budget = kDefaultStage2Budget;
  InstructionTemplate instruction;
  DecodingConfig decoding;
  BackendConfig backend;
  std::size_t parallelism = 1;
  BleuConfig metrics;
  std::filesystem::path hypotheses;  // evaluate input; empty: <output_dir>/hypotheses.jsonl
  std::filesystem::path references;  // empty: the corpus
  std::filesystem::path output_dir = "out";

  /// Merged settings after path resolution; echoed into the run manifest.
  nlohmann::ordered_json effective;
};

/// Built-in defaults in file layout.
nlohmann::ordered_json default_config_json();

/// Applies "a.b.c=value" to j. The value is parsed as JSON when it is valid
/// JSON and taken as a string otherwise.
void apply_override(nlohmann::ordered_json& j, const std::string& assignment);

/// Relative paths in the file resolve against the file's directory; those in
/// overrides against the working directory. Unknown keys, out-of-range
/// numbers and missing input files raise ConfigError.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides = {});

RunConfig parse_run_config(const nlohmann::ordered_json& merged);

}  // namespace litmt
