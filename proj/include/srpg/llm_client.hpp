#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <semaphore>
#include <string>

#include "srpg/error.hpp"

namespace srpg {

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 1024;
  double temperature = 0.0;
  std::string model;  // empty: backend default
  std::string request_id;
};

enum class BackendErrorKind { Timeout, Authentication, RateLimit, Transport, MalformedResponse };

std::string_view to_string(BackendErrorKind kind);

// Error codes: timeout, authentication, rate_limit, transport,
// malformed_response.
class BackendError : public Error {
 public:
  BackendError(BackendErrorKind kind, const std::string& message)
      : Error(std::string(to_string(kind)), message), kind_(kind) {}
  BackendErrorKind kind() const noexcept { return kind_; }

 private:
  BackendErrorKind kind_;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Returns the model's text. Throws BackendError.
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct BackendConfig {
  std::string base_url = "http://127.0.0.1:8080/v1";
  std::string model = "gpt-4o";
  double timeout_seconds = 30.0;
  int max_retries = 2;
  int max_concurrent = 4;
  std::string api_key_env = "SRPG_LLM_API_KEY";
  double backoff_base_seconds = 0.5;
  double backoff_factor = 2.0;
  double backoff_jitter = 0.25;  // fraction of the delay

  // Throws ConfigError on timeout <= 0, retries < 0 or concurrency < 1.
  void validate() const;
};

// Chat-completions client over HTTP(S). Shareable across threads; the only
// synchronized state is the in-flight semaphore.
class HttpBackend : public LlmClient {
 public:
  explicit HttpBackend(BackendConfig config);

  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

  // For tests: replaces the sleep between retries.
  void set_sleeper(std::function<void(double)> sleeper) { sleeper_ = std::move(sleeper); }

 private:
  std::string attempt(const std::string& body, const std::string& request_id);

  BackendConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<1024> slots_;
  std::function<void(double)> sleeper_;
};

// Wire body sent for a request (chat-completions shape).
std::string chat_request_body(const CompletionRequest& request, const std::string& default_model);
// Extracts choices[0].message.content; throws BackendError(MalformedResponse).
std::string parse_chat_response(const std::string& body);

}  // namespace srpg
