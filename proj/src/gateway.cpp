#include "srpg/gateway.hpp"

#include <chrono>
#include <iostream>

#include "httplib.h"
#include "srpg/error.hpp"
#include "srpg/hash.hpp"
#include "srpg/text.hpp"

namespace srpg {

std::pair<std::string, int> parse_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == listen.size())
    throw ConfigError("listen address must be HOST:PORT, got \"" + listen + "\"");
  std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(listen.substr(colon + 1), &used);
    if (used != listen.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError("bad port in \"" + listen + "\"");
  }
  if (port < 0 || port > 65535) throw ConfigError("port out of range in \"" + listen + "\"");
  return {host, port};
}

Gateway::Gateway(Runtime runtime) : runtime_(std::move(runtime)) {
  for (GuardMethod m : {GuardMethod::None, GuardMethod::Naive, GuardMethod::PureLLM, GuardMethod::EPE,
                        GuardMethod::SRPG}) {
    if (m == GuardMethod::PureLLM && !runtime_.client) continue;
    guards_[m] = runtime_.guard(m);
  }
  logger_ = [](const std::string& line) { std::cerr << line << '\n'; };
}

Gateway::~Gateway() { stop(); }

void Gateway::log(const Json& entry) const {
  std::lock_guard lock(log_mu_);
  if (logger_) logger_(entry.dump());
}

namespace {

Gateway::Response error_response(int status, const std::string& code, const std::string& message) {
  return {status, Json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

}  // namespace

Gateway::Response Gateway::relay(const std::string& fused, const std::string& session_id) const {
  const std::string& url = runtime_.config.gateway.upstream;
  auto scheme_end = url.find("://");
  auto path_at = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  std::string base = path_at == std::string::npos ? url : url.substr(0, path_at);
  std::string path = path_at == std::string::npos ? "/" : url.substr(path_at);
  httplib::Client cli(base);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(30);
  Json body{{"text", fused}};
  if (!session_id.empty()) body["session_id"] = session_id;
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) return {0, ""};
  return {res->status, res->body};
}

Gateway::Response Gateway::handle_guard(const std::string& body) const {
  const auto t0 = std::chrono::steady_clock::now();
  Json entry{{"event", "guard"}, {"body_bytes", body.size()}};
  auto finish = [&](Response r, const std::string& code = {}) {
    entry["status"] = r.status;
    if (!code.empty()) entry["error"] = code;
    entry["latency_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    log(entry);
    return r;
  };

  if (body.size() > runtime_.config.gateway.max_body_bytes)
    return finish(error_response(413, "too_large", "request body exceeds the size limit"), "too_large");
  Json req;
  try {
    req = Json::parse(body);
  } catch (const Json::parse_error&) {
    return finish(error_response(400, "bad_request", "body is not valid JSON"), "bad_request");
  }
  if (!req.is_object() || !req.contains("text") || !req["text"].is_string())
    return finish(error_response(400, "bad_request", "\"text\" must be a string"), "bad_request");
  const std::string text = req["text"].get<std::string>();
  entry["text_sha256"] = sha256_hex(text);
  entry["text_chars"] = text::scalar_length(text);
  if (runtime_.config.gateway.log_raw) entry["text"] = text;
  if (text.empty()) return finish(error_response(400, "empty_text", "\"text\" must not be empty"), "empty_text");

  std::string session_id;
  if (req.contains("session_id")) {
    if (!req["session_id"].is_string())
      return finish(error_response(400, "bad_request", "\"session_id\" must be a string"), "bad_request");
    session_id = req["session_id"].get<std::string>();
    entry["session_sha256"] = sha256_hex(session_id);
  }
  GuardMethod method = GuardMethod::SRPG;
  if (req.contains("method") && !req["method"].is_null()) {
    auto m = req["method"].is_string() ? parse_guard_method(req["method"].get<std::string>()) : std::nullopt;
    if (!m) return finish(error_response(422, "unknown_method", "unknown guard method"), "unknown_method");
    method = *m;
  }
  entry["method"] = std::string(to_string(method));
  auto g = guards_.find(method);
  if (g == guards_.end())
    return finish(error_response(422, "unsupported_method", "method needs a model backend"), "unsupported_method");

  GuardOutput out;
  try {
    out = g->second->guard(text, session_id);
  } catch (const GuardIntegrityError& e) {
    return finish(error_response(500, e.code(), "guard output failed the leak check"), e.code());
  } catch (const GuardError& e) {
    return finish(error_response(502, "backend_failure", "backend failed; nothing was forwarded"), e.code());
  } catch (const BackendError& e) {
    return finish(error_response(502, "backend_failure", "backend failed; nothing was forwarded"), e.code());
  } catch (const std::exception&) {
    return finish(error_response(500, "internal_error", "internal error"), "internal_error");
  }

  // never answer 200 with text our own detector still flags
  auto hits = records_from_spans(detect_pii(text, *runtime_.gazetteer, runtime_.config.policy()));
  if (!find_leaks(out.fused_text, hits).empty())
    return finish(error_response(500, "guard_integrity", "guard output failed the leak check"), "guard_integrity");

  entry["degraded"] = out.degraded;
  entry["audit_count"] = out.audit.size();
  Json resp{{"fused_text", out.fused_text},
            {"masked_text", out.masked_text},
            {"context", out.context ? Json(*out.context) : Json(nullptr)},
            {"audit", out.audit},
            {"method", std::string(to_string(out.method))},
            {"backend", out.backend},
            {"degraded", out.degraded}};

  if (!runtime_.config.gateway.upstream.empty()) {
    Response up = relay(out.fused_text, session_id);
    entry["upstream_status"] = up.status;
    if (up.status < 200 || up.status >= 300)
      return finish(error_response(502, "upstream_failure", "upstream relay failed"), "upstream_failure");
    resp["upstream_status"] = up.status;
  }
  return finish({200, resp.dump()});
}

int Gateway::bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  const int threads = runtime_.config.gateway.threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  // a generous transport cap; the configured limit is enforced in handle_guard
  server_->set_payload_max_length(runtime_.config.gateway.max_body_bytes * 4 + 4096);
  server_->Post("/v1/guard", [this](const httplib::Request& req, httplib::Response& res) {
    Response r = handle_guard(req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"status\":\"ok\"}", "application/json");
  });
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Gateway::run() {
  if (!server_) throw ConfigError("gateway not bound");
  server_->listen_after_bind();
}

void Gateway::stop() {
  if (server_) server_->stop();
}

}  // namespace srpg
