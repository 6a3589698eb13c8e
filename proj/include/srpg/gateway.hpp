#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "srpg/config.hpp"

namespace httplib {
class Server;
}

namespace srpg {

// "HOST:PORT" -> (host, port); throws ConfigError.
std::pair<std::string, int> parse_listen(const std::string& listen);

// Guard-as-a-service. POST /v1/guard takes {"text", "method"?, "session_id"?}
// and answers with the guarded message; GET /healthz answers 200. Request
// logs carry hashes of the text, never the text itself unless log_raw is set.
class Gateway {
 public:
  struct Response {
    int status = 200;
    std::string body;
  };
  using Logger = std::function<void(const std::string&)>;

  explicit Gateway(Runtime runtime);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // One JSON line per request. Default: stderr.
  void set_logger(Logger logger) { logger_ = std::move(logger); }

  // Socket-free request handling, used by the server and by tests.
  Response handle_guard(const std::string& body) const;

  // Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

 private:
  void log(const Json& entry) const;
  Response relay(const std::string& fused, const std::string& session_id) const;

  Runtime runtime_;
  std::map<GuardMethod, std::unique_ptr<Guard>> guards_;
  std::unique_ptr<httplib::Server> server_;
  Logger logger_;
  mutable std::mutex log_mu_;
};

}  // namespace srpg
