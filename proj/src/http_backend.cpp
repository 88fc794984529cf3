#include "litmt/http_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <httplib.h>

namespace litmt {

RateLimiter::RateLimiter(double rate) {
  if (rate > 0.0)
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(1.0 / rate));
}

void RateLimiter::acquire() {
  if (interval_ == std::chrono::steady_clock::duration::zero()) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

namespace {

bool mentions_context_limit(const std::string& body) {
  std::string lower(body.size(), '\0');
  std::transform(body.begin(), body.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const char* needle : {"context_length", "context length", "maximum context", "too many tokens", "prompt is too long",
                             "token limit"})
    if (lower.find(needle) != std::string::npos) return true;
  return false;
}

std::string snippet(const std::string& body) { return body.size() > 200 ? body.substr(0, 200) + "..." : body; }

// Splits "http://host:port/prefix" into the client origin and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

}  // namespace

BackendError classify_http_failure(int status, const std::string& body) {
  const std::string detail = "HTTP " + std::to_string(status) + ": " + snippet(body);
  if (status == 429) return BackendError(BackendErrorKind::rate_limit, detail);
  if (status == 408 || status >= 500) return BackendError(BackendErrorKind::network, detail);
  if ((status == 400 || status == 413 || status == 422) && mentions_context_limit(body))
    return BackendError(BackendErrorKind::overlong_prompt, detail);
  if (status == 413) return BackendError(BackendErrorKind::overlong_prompt, detail);
  return BackendError(BackendErrorKind::protocol, detail);
}

std::string parse_completion(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw BackendError(BackendErrorKind::protocol, "response is not JSON: " + snippet(body));
  }
  const nlohmann::json* content = nullptr;
  if (j.is_object() && j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& choice = j["choices"][0];
    if (choice.is_object() && choice.contains("message") && choice["message"].is_object() &&
        choice["message"].contains("content"))
      content = &choice["message"]["content"];
  }
  if (!content) throw BackendError(BackendErrorKind::protocol, "response lacks choices[0].message.content");
  if (content->is_null()) throw BackendError(BackendErrorKind::empty_output, "null completion content");
  if (!content->is_string()) throw BackendError(BackendErrorKind::protocol, "completion content is not a string");
  auto text = content->get<std::string>();
  if (text.empty()) throw BackendError(BackendErrorKind::empty_output, "empty completion");
  return text;
}

HttpBackend::HttpBackend(EndpointConfig config) : config_(std::move(config)), limiter_(config_.rate_cap) {
  if (config_.base_url.empty()) throw std::invalid_argument("http backend requires base_url");
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
      throw std::invalid_argument("environment variable " + config_.api_key_env + " (api_key_env) is not set");
    api_key_ = key;
  }
}

HttpBackend::~HttpBackend() = default;

BackendCapabilities HttpBackend::capabilities() const {
  return {"http:" + config_.model, config_.max_prompt_length, config_.supports_system_role};
}

nlohmann::ordered_json HttpBackend::build_request(const PromptSpec& prompt) const {
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  const auto& r = prompt.rendered;
  if (config_.supports_system_role && !r.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", r.system}});
    messages.push_back({{"role", "user"}, {"content", r.user}});
  } else {
    messages.push_back({{"role", "user"}, {"content", r.flatten()}});
  }
  nlohmann::ordered_json body;
  body["model"] = config_.model;
  body["messages"] = std::move(messages);
  body["temperature"] = config_.temperature;
  body["max_tokens"] = config_.max_tokens;
  return body;
}

std::unique_ptr<httplib::Client> HttpBackend::acquire_client() {
  {
    std::lock_guard lock(pool_mu_);
    if (!pool_.empty()) {
      auto c = std::move(pool_.back());
      pool_.pop_back();
      return c;
    }
  }
  auto c = std::make_unique<httplib::Client>(split_base_url(config_.base_url).first);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  c->set_connection_timeout(secs, usecs);
  c->set_read_timeout(secs, usecs);
  c->set_write_timeout(secs, usecs);
  c->set_keep_alive(true);
  return c;
}

void HttpBackend::release_client(std::unique_ptr<httplib::Client> client) {
  std::lock_guard lock(pool_mu_);
  if (pool_.size() < config_.pool_size) pool_.push_back(std::move(client));
}

std::string HttpBackend::translate(const PromptSpec& prompt) {
  if (config_.max_prompt_length > 0 && prompt.rendered.flatten().size() > config_.max_prompt_length)
    throw BackendError(BackendErrorKind::overlong_prompt, "prompt exceeds max_prompt_length");

  const std::string body = build_request(prompt).dump();
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  limiter_.acquire();
  auto client = acquire_client();
  auto res = client->Post(split_base_url(config_.base_url).second + config_.path, headers, body, "application/json");
  if (!res) throw BackendError(BackendErrorKind::network, httplib::to_string(res.error()));
  release_client(std::move(client));

  if (res->status < 200 || res->status >= 300) throw classify_http_failure(res->status, res->body);
  return parse_completion(res->body);
}

}  // namespace litmt
