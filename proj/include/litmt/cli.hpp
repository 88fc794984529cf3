#pragma once

// Command-line driver: prepare, translate, evaluate, validate.

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "litmt/backend.hpp"
#include "litmt/config.hpp"
#include "litmt/decoder.hpp"

namespace litmt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitAlignment = 3;

using BackendFactory = std::function<std::unique_ptr<TranslationBackend>(const RunConfig&)>;

struct CliEnvironment {
  std::ostream* out = nullptr;  // null: std::cout
  std::ostream* err = nullptr;  // null: std::cerr
  BackendFactory backend_factory;  // null: make_backend
  Sleeper sleeper = default_sleeper;
};

std::unique_ptr<TranslationBackend> make_backend(const RunConfig& config);

/// Loads the configured corpus (record file or line-aligned pair).
Corpus load_corpus(const RunConfig& config);

int cmd_validate(const RunConfig& config, const CliEnvironment& env = {});
int cmd_prepare(const std::string& stage, const RunConfig& config, const CliEnvironment& env = {});
int cmd_translate(const RunConfig& config, bool dry_run, const CliEnvironment& env = {});
int cmd_evaluate(const std::string& hyp_path, const std::string& ref_path, const RunConfig& config,
                 const CliEnvironment& env = {});

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, const CliEnvironment& env = {});

}  // namespace litmt
