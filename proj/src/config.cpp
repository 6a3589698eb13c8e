#include "srpg/config.hpp"

#include <cstdlib>
#include <fstream>

#include "srpg/error.hpp"
#include "srpg/hash.hpp"

#ifndef SRPG_DEFAULT_DATA_DIR
#define SRPG_DEFAULT_DATA_DIR "data"
#endif

namespace srpg {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Deterministic: return "deterministic";
    case BackendKind::Mock: return "mock";
    case BackendKind::Http: return "http";
  }
  return "deterministic";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) {
  if (name == "deterministic") return BackendKind::Deterministic;
  if (name == "mock") return BackendKind::Mock;
  if (name == "http") return BackendKind::Http;
  return std::nullopt;
}

namespace {

// Walks a JSON object, rejecting keys nobody asked for.
class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + " must be an object");
  }
  ~Reader() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(where_ + "." + key + " has the wrong type");
    }
  }
  template <typename F>
  void section(const char* key, F&& f) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader sub(j_.at(key), where_ + "." + key);
    f(sub);
    sub.finish();
  }
  template <typename T, typename Parse>
  void parsed(const char* key, T& out, Parse parse) {
    std::string s;
    bool had = j_.contains(key);
    get(key, s);
    if (!had) return;
    auto v = parse(s);
    if (!v) throw ConfigError(where_ + "." + key + ": unknown value \"" + s + "\"");
    out = *v;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key \"" + it.key() + "\"");
  }
  const Json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  bool has(const char* key) const { return j_.contains(key); }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::optional<Aggressiveness> parse_aggr(std::string_view s) {
  if (s == "strict") return Aggressiveness::Strict;
  if (s == "standard") return Aggressiveness::Standard;
  return std::nullopt;
}

}  // namespace

AppConfig AppConfig::from_json(const Json& j) {
  AppConfig c;
  Reader r(j, "config");
  r.get("data_dir", c.data_dir);
  r.get("gazetteer", c.gazetteer);
  r.get("units", c.units);
  r.get("templates", c.templates);
  r.get("profiles", c.profiles);
  r.get("injection_bank", c.injection_bank);
  r.section("prompts", [&](Reader& p) {
    p.get("reconstruct", c.reconstruct_prompt);
    p.get("remove_pii", c.removal_prompt);
  });
  r.section("detection", [&](Reader& d) {
    d.parsed("aggressiveness", c.aggressiveness, parse_aggr);
    d.get("numeric_context_window", c.numeric_context_window);
  });
  r.section("guard", [&](Reader& g) {
    g.parsed("reconstruct_from", c.reconstruct_from, parse_reconstruct_from);
    g.get("summarize_prefix", c.summarize_prefix);
    g.get("parallel_streams", c.parallel_streams);
    g.get("tutor_role", c.tutor_role);
  });
  r.section("backend", [&](Reader& b) {
    b.parsed("kind", c.backend, parse_backend_kind);
    b.parsed("mock_mode", c.mock_mode, parse_mock_mode);
    b.get("mock_slow_seconds", c.mock_slow_seconds);
    b.get("mock_timeout_seconds", c.mock_timeout_seconds);
    b.get("base_url", c.http.base_url);
    b.get("model", c.http.model);
    b.get("timeout_seconds", c.http.timeout_seconds);
    b.get("max_retries", c.http.max_retries);
    b.get("max_concurrent", c.http.max_concurrent);
    b.get("api_key_env", c.http.api_key_env);
  });
  r.section("gateway", [&](Reader& g) {
    g.get("listen", c.gateway.listen);
    g.get("max_body_bytes", c.gateway.max_body_bytes);
    g.get("log_raw", c.gateway.log_raw);
    g.get("upstream", c.gateway.upstream);
    g.get("threads", c.gateway.threads);
  });
  if (r.has("weights")) c.weights = CompositeWeights::from_json(r.raw("weights"));
  r.finish();

  if (c.numeric_context_window < 1) throw ConfigError("detection.numeric_context_window must be >= 1");
  if (c.gateway.max_body_bytes == 0) throw ConfigError("gateway.max_body_bytes must be > 0");
  if (c.gateway.threads < 1) throw ConfigError("gateway.threads must be >= 1");
  if (!(c.mock_slow_seconds >= 0)) throw ConfigError("backend.mock_slow_seconds must be >= 0");
  if (!(c.mock_timeout_seconds > 0)) throw ConfigError("backend.mock_timeout_seconds must be > 0");
  c.http.validate();
  c.weights.validate();
  return c;
}

AppConfig AppConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j);
}

Json AppConfig::to_json() const {
  // the credential itself never lands here, only the variable name
  return Json{{"data_dir", data_dir},
              {"gazetteer", gazetteer},
              {"units", units},
              {"templates", templates},
              {"profiles", profiles},
              {"injection_bank", injection_bank},
              {"prompts", {{"reconstruct", reconstruct_prompt}, {"remove_pii", removal_prompt}}},
              {"detection",
               {{"aggressiveness", aggressiveness == Aggressiveness::Strict ? "strict" : "standard"},
                {"numeric_context_window", numeric_context_window}}},
              {"guard",
               {{"reconstruct_from", std::string(srpg::to_string(reconstruct_from))},
                {"summarize_prefix", summarize_prefix},
                {"parallel_streams", parallel_streams},
                {"tutor_role", tutor_role}}},
              {"backend",
               {{"kind", std::string(srpg::to_string(backend))},
                {"mock_mode", std::string(srpg::to_string(mock_mode))},
                {"mock_slow_seconds", mock_slow_seconds},
                {"mock_timeout_seconds", mock_timeout_seconds},
                {"base_url", http.base_url},
                {"model", http.model},
                {"timeout_seconds", http.timeout_seconds},
                {"max_retries", http.max_retries},
                {"max_concurrent", http.max_concurrent},
                {"api_key_env", http.api_key_env}}},
              {"gateway",
               {{"listen", gateway.listen},
                {"max_body_bytes", gateway.max_body_bytes},
                {"log_raw", gateway.log_raw},
                {"upstream", gateway.upstream},
                {"threads", gateway.threads}}},
              {"weights",
               {{"privacy", weights.privacy},
                {"utility", weights.utility},
                {"exact_match", weights.exact_match},
                {"key_param_recall", weights.key_param_recall},
                {"hard_solvability", weights.hard_solvability}}}};
}

std::string AppConfig::sha256() const {
  // data_dir differs between machines and does not change behaviour
  Json j = to_json();
  j.erase("data_dir");
  return sha256_hex(j.dump());
}

std::string AppConfig::resolved_data_dir() const {
  if (!data_dir.empty()) return data_dir;
  if (const char* env = std::getenv("SRPG_DATA_DIR"); env && *env) return env;
  return SRPG_DEFAULT_DATA_DIR;
}

std::string AppConfig::data_path(const std::string& override_path, const std::string& name) const {
  if (!override_path.empty()) return override_path;
  return resolved_data_dir() + "/" + name;
}

DetectionPolicy AppConfig::policy() const {
  DetectionPolicy p;
  p.aggressiveness = aggressiveness;
  p.numeric_context_window = numeric_context_window;
  return p;
}

GuardConfig AppConfig::guard_config() const {
  GuardConfig g;
  g.policy = policy();
  g.reconstruct_from = reconstruct_from;
  g.summarize_prefix = summarize_prefix;
  g.parallel_streams = parallel_streams;
  g.tutor_role = tutor_role;
  return g;
}

Runtime Runtime::build(const AppConfig& config) {
  Runtime rt;
  rt.config = config;
  rt.gazetteer = std::make_shared<const Gazetteer>(Gazetteer::load(config.data_path(config.gazetteer, "gazetteer.json")));
  ContextSchema schema;
  schema.units = UnitLexicon::load(config.data_path(config.units, "units.json"));
  rt.reconstructor = std::make_shared<const ContextReconstructor>(rt.gazetteer, schema);
  switch (config.backend) {
    case BackendKind::Deterministic: break;
    case BackendKind::Mock:
      rt.client = std::make_shared<MockBackend>(config.mock_mode, rt.reconstructor, config.mock_slow_seconds,
                                                config.mock_timeout_seconds);
      break;
    case BackendKind::Http: rt.client = std::make_shared<HttpBackend>(config.http); break;
  }
  GuardComponents& c = rt.components;
  c.gazetteer = rt.gazetteer;
  c.reconstructor = rt.reconstructor;
  c.client = rt.client;
  c.backend = std::string(to_string(config.backend));
  c.units = schema.units;
  c.reconstruct_prompt = PromptTemplate::load(config.data_path(config.reconstruct_prompt, "prompts/reconstruct.txt"));
  c.removal_prompt = PromptTemplate::load(config.data_path(config.removal_prompt, "prompts/remove_pii.txt"));
  return rt;
}

std::unique_ptr<Guard> Runtime::guard(GuardMethod method) const {
  return make_guard(method, components, config.guard_config());
}

}  // namespace srpg
