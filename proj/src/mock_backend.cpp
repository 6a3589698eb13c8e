#include "srpg/mock_backend.hpp"

#include <chrono>
#include <thread>

namespace srpg {
namespace {

constexpr std::string_view kModeNames[] = {"faithful", "leaky", "malformed", "slow"};

std::string_view task_of(std::string_view prompt) {
  constexpr std::string_view kTask = "### task: ";
  if (prompt.substr(0, kTask.size()) != kTask) return {};
  prompt.remove_prefix(kTask.size());
  return prompt.substr(0, prompt.find('\n'));
}

std::optional<std::string_view> input_of(std::string_view prompt) {
  constexpr std::string_view kOpen = "<<CTX>>\n";
  constexpr std::string_view kClose = "\n<</CTX>>";
  const auto b = prompt.find(kOpen);
  if (b == std::string_view::npos) return std::nullopt;
  const auto e = prompt.find(kClose, b + kOpen.size());
  if (e == std::string_view::npos) return std::nullopt;
  return prompt.substr(b + kOpen.size(), e - b - kOpen.size());
}

}  // namespace

std::string_view to_string(MockMode mode) { return kModeNames[static_cast<int>(mode)]; }

std::optional<MockMode> parse_mock_mode(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kModeNames); ++i) {
    if (kModeNames[i] == name) return static_cast<MockMode>(i);
  }
  return std::nullopt;
}

MockBackend::MockBackend(MockMode mode, std::shared_ptr<const ContextReconstructor> reconstructor,
                         double slow_seconds, double timeout_seconds)
    : mode_(mode),
      reconstructor_(std::move(reconstructor)),
      slow_seconds_(slow_seconds),
      timeout_seconds_(timeout_seconds) {
  if (!reconstructor_) throw ConfigError("mock backend needs a reconstructor");
}

std::string MockBackend::reconstruct(std::string_view input, bool leaky) const {
  MathContext ctx = reconstructor_->reconstruct_deterministic(input);
  if (leaky) {
    const auto& people = reconstructor_->gazetteer().entries(PiiKind::PersonName);
    const std::string name = people.empty() ? "Alice Chen" : people.front().aliases.front();
    if (ctx.quantities.empty()) {
      ctx.quantities.push_back(Quantity{"1", std::nullopt, name});
    } else {
      auto& q = ctx.quantities.front();
      q.label = name + "'s " + q.label.value_or("items");
    }
  }
  return Json(ctx).dump();
}

std::string MockBackend::remove_pii(std::string_view input) const {
  const auto toks = text::tokenize(input);
  std::string out;
  std::size_t pos = 0;
  for (const auto& m : reconstructor_->gazetteer().find_all(input, toks)) {
    if (m.begin < pos) continue;
    out.append(input.substr(pos, m.begin - pos));
    pos = m.end;
  }
  out.append(input.substr(pos));
  return "<<SAFE>>" + text::collapse_whitespace(out) + "<</SAFE>>";
}

std::string MockBackend::complete(const CompletionRequest& request) {
  ++calls_;
  const auto task = task_of(request.prompt);
  const auto input = input_of(request.prompt);
  if (task.empty() || !input) {
    throw BackendError(BackendErrorKind::MalformedResponse, "mock: prompt has no task line or <<CTX>> block");
  }
  const bool reconstruct_task = task == "reconstruct";
  if (!reconstruct_task && task != "remove-pii") {
    throw BackendError(BackendErrorKind::MalformedResponse, "mock: unknown task '" + std::string(task) + "'");
  }

  switch (mode_) {
    case MockMode::Faithful:
      return reconstruct_task ? reconstruct(*input, false) : remove_pii(*input);
    case MockMode::Leaky:
      return reconstruct_task ? reconstruct(*input, true) : "<<SAFE>>" + std::string(*input) + "<</SAFE>>";
    case MockMode::Malformed: {
      if (!reconstruct_task) return "Sure! Here is the cleaned message.";
      const auto full = reconstruct(*input, false);
      return full.substr(0, full.size() / 2);
    }
    case MockMode::Slow: {
      const double wait = std::min(slow_seconds_, timeout_seconds_);
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
      if (slow_seconds_ > timeout_seconds_) {
        throw BackendError(BackendErrorKind::Timeout, "mock: no reply within the timeout");
      }
      return reconstruct_task ? reconstruct(*input, false) : remove_pii(*input);
    }
  }
  return {};
}

}  // namespace srpg
