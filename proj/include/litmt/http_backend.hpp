#pragma once

// Chat-completions client for OpenAI-compatible inference servers.

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "litmt/backend.hpp"

namespace httplib {
class Client;
}

namespace litmt {

struct EndpointConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env;  // empty: no Authorization header
  double timeout_seconds = 60.0;
  double temperature = 0.0;
  int max_tokens = 512;
  bool supports_system_role = true;
  std::size_t max_prompt_length = 0;
  double rate_cap = 0.0;  // requests per second across all threads; 0 = off
  std::size_t pool_size = 8;
};

/// Spaces out request starts to at most `rate` per second.
class RateLimiter {
 public:
  explicit RateLimiter(double rate);
  void acquire();

 private:
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
  std::mutex mu_;
};

/// Maps a non-2xx reply to its error class: 429 -> rate_limit,
/// 408/5xx -> network, context-length rejections -> overlong_prompt,
/// anything else -> protocol.
BackendError classify_http_failure(int status, const std::string& body);

/// Extracts choices[0].message.content; throws protocol or empty_output.
std::string parse_completion(const std::string& body);

class HttpBackend : public TranslationBackend {
 public:
  /// Reads the API key from the environment immediately; a missing variable
  /// is a configuration error (std::invalid_argument).
  explicit HttpBackend(EndpointConfig config);
  ~HttpBackend() override;

  BackendCapabilities capabilities() const override;
  std::string translate(const PromptSpec& prompt) override;

  /// Exact request body sent for a prompt.
  nlohmann::ordered_json build_request(const PromptSpec& prompt) const;

 private:
  std::unique_ptr<httplib::Client> acquire_client();
  void release_client(std::unique_ptr<httplib::Client> client);

  EndpointConfig config_;
  std::string api_key_;
  RateLimiter limiter_;
  std::mutex pool_mu_;
  std::vector<std::unique_ptr<httplib::Client>> pool_;
};

}  // namespace litmt
