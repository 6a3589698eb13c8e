#pragma once

#include <memory>
#include <optional>
#include <string>

#include "srpg/core_model.hpp"
#include "srpg/corpus.hpp"
#include "srpg/evaluator.hpp"
#include "srpg/guard_pipeline.hpp"
#include "srpg/llm_client.hpp"
#include "srpg/mock_backend.hpp"

namespace srpg {

enum class BackendKind { Deterministic, Mock, Http };
std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view name);

struct GatewayConfig {
  std::string listen = "127.0.0.1:8088";
  std::size_t max_body_bytes = 32 * 1024;
  bool log_raw = false;
  std::string upstream;  // empty: no relay
  int threads = 8;
};

// Every field has a default; a config file only lists what it changes.
// Unknown keys are rejected.
struct AppConfig {
  std::string data_dir;  // empty: $SRPG_DATA_DIR, then the built-in path
  std::string gazetteer, units, templates, profiles, injection_bank;  // empty: under data_dir
  std::string reconstruct_prompt, removal_prompt;

  Aggressiveness aggressiveness = Aggressiveness::Strict;
  int numeric_context_window = 3;

  ReconstructFrom reconstruct_from = ReconstructFrom::Raw;
  bool summarize_prefix = false;
  bool parallel_streams = true;
  std::string tutor_role{kDefaultTutorRole};

  BackendKind backend = BackendKind::Deterministic;
  MockMode mock_mode = MockMode::Faithful;
  double mock_slow_seconds = 0.2;
  double mock_timeout_seconds = 0.05;
  BackendConfig http;

  GatewayConfig gateway;
  CompositeWeights weights;

  static AppConfig from_json(const Json& j);
  static AppConfig load(const std::string& path);
  Json to_json() const;
  std::string sha256() const;

  std::string resolved_data_dir() const;
  // `name` under the data dir unless `override_path` is set.
  std::string data_path(const std::string& override_path, const std::string& name) const;

  DetectionPolicy policy() const;
  GuardConfig guard_config() const;
};

// Loaded resources shared by guards, the evaluator and the gateway.
struct Runtime {
  AppConfig config;
  std::shared_ptr<const Gazetteer> gazetteer;
  std::shared_ptr<const ContextReconstructor> reconstructor;
  std::shared_ptr<LlmClient> client;  // null for the deterministic backend
  GuardComponents components;

  static Runtime build(const AppConfig& config);
  std::unique_ptr<Guard> guard(GuardMethod method) const;
};

}  // namespace srpg
