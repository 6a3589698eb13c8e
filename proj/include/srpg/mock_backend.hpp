#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string_view>

#include "srpg/llm_client.hpp"
#include "srpg/reconstructor.hpp"

namespace srpg {

enum class MockMode { Faithful, Leaky, Malformed, Slow };

std::string_view to_string(MockMode mode);
std::optional<MockMode> parse_mock_mode(std::string_view name);

// Deterministic stand-in for a model. Reads the "### task:" line and the
// text between <<CTX>> and <</CTX>> of the prompt.
//   faithful   reconstruct: deterministic parser output as JSON;
//              remove-pii: input with gazetteer hits deleted
//   leaky      reconstruct: like faithful plus a gazetteer name in a label;
//              remove-pii: input unchanged
//   malformed  truncated JSON / reply without <<SAFE>> markers
//   slow       sleeps past `timeout_seconds`, then fails with a timeout
class MockBackend : public LlmClient {
 public:
  MockBackend(MockMode mode, std::shared_ptr<const ContextReconstructor> reconstructor,
              double slow_seconds = 0.2, double timeout_seconds = 0.05);

  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "mock"; }

  int calls() const { return calls_.load(); }

 private:
  std::string reconstruct(std::string_view input, bool leaky) const;
  std::string remove_pii(std::string_view input) const;

  MockMode mode_;
  std::shared_ptr<const ContextReconstructor> reconstructor_;
  double slow_seconds_;
  double timeout_seconds_;
  std::atomic<int> calls_{0};
};

}  // namespace srpg
