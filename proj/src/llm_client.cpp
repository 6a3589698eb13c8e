#include "srpg/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace srpg {
namespace {

using Json = nlohmann::json;

constexpr std::string_view kErrorNames[] = {"timeout", "authentication", "rate_limit", "transport",
                                            "malformed_response"};

bool retryable(BackendErrorKind kind) {
  return kind == BackendErrorKind::Timeout || kind == BackendErrorKind::RateLimit ||
         kind == BackendErrorKind::Transport;
}

// RAII slot in the concurrency bound.
class Slot {
 public:
  explicit Slot(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~Slot() { s_.release(); }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

std::string_view to_string(BackendErrorKind kind) { return kErrorNames[static_cast<int>(kind)]; }

void BackendConfig::validate() const {
  if (!(timeout_seconds > 0)) throw ConfigError("llm timeout must be > 0");
  if (max_retries < 0) throw ConfigError("llm max_retries must be >= 0");
  if (max_concurrent < 1 || max_concurrent > 1024) {
    throw ConfigError("llm max_concurrent must be between 1 and 1024");
  }
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw ConfigError("llm base_url must start with http:// or https://");
  }
}

std::string chat_request_body(const CompletionRequest& request, const std::string& default_model) {
  Json body = {{"model", request.model.empty() ? default_model : request.model},
               {"messages", Json::array({{{"role", "user"}, {"content", request.prompt}}})},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens}};
  return body.dump();
}

std::string parse_chat_response(const std::string& body) {
  try {
    const auto j = Json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw BackendError(BackendErrorKind::MalformedResponse, "content is not a string");
    return content.get<std::string>();
  } catch (const Json::exception& e) {
    throw BackendError(BackendErrorKind::MalformedResponse,
                       std::string("unexpected chat-completion response: ") + e.what());
  }
}

HttpBackend::HttpBackend(BackendConfig config)
    : config_(std::move(config)), slots_(config_.max_concurrent) {
  if (const char* url = std::getenv("SRPG_LLM_BASE_URL"); url && *url) config_.base_url = url;
  config_.validate();
  const auto scheme_end = config_.base_url.find("://") + 3;
  const auto slash = config_.base_url.find('/', scheme_end);
  scheme_host_port_ = config_.base_url.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? "" : config_.base_url.substr(slash);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  sleeper_ = [](double seconds) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  };
}

std::string HttpBackend::attempt(const std::string& body, const std::string& request_id) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  if (!request_id.empty()) headers.emplace("X-Request-Id", request_id);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw BackendError(BackendErrorKind::Timeout, "request timed out (" + httplib::to_string(err) + ")");
    }
    throw BackendError(BackendErrorKind::Transport, "transport failure (" + httplib::to_string(err) + ")");
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw BackendError(BackendErrorKind::Authentication, "backend rejected credentials (HTTP " + std::to_string(status) + ")");
  }
  if (status == 429) throw BackendError(BackendErrorKind::RateLimit, "backend rate limit (HTTP 429)");
  if (status >= 500) throw BackendError(BackendErrorKind::Transport, "backend error (HTTP " + std::to_string(status) + ")");
  if (status != 200) {
    // Not retried: a 4xx other than 429 will not get better.
    throw BackendError(BackendErrorKind::MalformedResponse, "unexpected HTTP status " + std::to_string(status));
  }
  return parse_chat_response(res->body);
}

std::string HttpBackend::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw ValidationError("completion prompt is empty");
  if (request.temperature != 0.0) throw ValidationError("temperature must be 0");
  const auto body = chat_request_body(request, config_.model);

  std::mt19937_64 rng(std::hash<std::string>{}(request.request_id + request.prompt));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double delay = config_.backoff_base_seconds;
  for (int tries = 0;; ++tries) {
    try {
      Slot slot(slots_);
      return attempt(body, request.request_id);
    } catch (const BackendError& e) {
      if (!retryable(e.kind()) || tries >= config_.max_retries) throw;
    }
    sleeper_(std::max(0.0, delay * (1.0 + config_.backoff_jitter * unit(rng))));
    delay *= config_.backoff_factor;
  }
}

}  // namespace srpg
