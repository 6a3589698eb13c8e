#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srpg/core_model.hpp"
#include "srpg/llm_client.hpp"
#include "srpg/pii_detector.hpp"
#include "srpg/reconstructor.hpp"
#include "srpg/sanitizer.hpp"

namespace srpg {

enum class ReconstructFrom { Raw, Safe };
std::string_view to_string(ReconstructFrom from);
std::optional<ReconstructFrom> parse_reconstruct_from(std::string_view name);

inline constexpr std::string_view kDefaultTutorRole =
    "Tutor agent for math homework. Allowed fields: problem, question, answer, work.";

struct GuardConfig {
  DetectionPolicy policy = DetectionPolicy::strict();
  ReconstructFrom reconstruct_from = ReconstructFrom::Raw;
  bool summarize_prefix = false;
  bool parallel_streams = true;
  std::string tutor_role{kDefaultTutorRole};
};

// Shared, immutable after construction. `client` is null for the
// deterministic backend.
struct GuardComponents {
  std::shared_ptr<const Gazetteer> gazetteer;
  std::shared_ptr<const ContextReconstructor> reconstructor;
  std::shared_ptr<LlmClient> client;
  std::string backend = "deterministic";
  UnitLexicon units = UnitLexicon::defaults();
  PromptTemplate reconstruct_prompt;
  PromptTemplate removal_prompt;
};

class Guard {
 public:
  virtual ~Guard() = default;
  virtual GuardMethod method() const = 0;
  // Throws GuardError (or GuardIntegrityError) instead of returning text
  // that could leak.
  virtual GuardOutput guard(std::string_view text, const std::string& id = {}) const = 0;
};

// Throws ConfigError when the method needs a client and none is given.
std::unique_ptr<Guard> make_guard(GuardMethod method, GuardComponents components, GuardConfig config = {});

// masked + "\nContext Supplement: {" + items + "}"
std::string fuse(std::string_view masked, const MathContext& ctx);
std::string fuse(const MaskedText& masked, const MathContext& ctx);

// One-sentence prefix used when summarize_prefix is on:
// "User [MASK] asks a <geometry|algebra|word> problem."
std::string summary_prefix(const MathContext& ctx);

GuardOutput srpg_guard(std::string_view text, const GuardComponents& components, const GuardConfig& config,
                       const std::string& id = {});
GuardOutput baseline_none(std::string_view text, const std::string& id = {});
GuardOutput baseline_naive(std::string_view text, const std::string& id = {});
GuardOutput baseline_pure_llm(std::string_view text, LlmClient& client, const PromptTemplate& prompt,
                              const std::string& id = {});
GuardOutput baseline_epe(std::string_view text, std::string_view role_description = kDefaultTutorRole,
                         const std::string& id = {});

// Keys listed after "fields:" in a role description, lowercased.
std::vector<std::string> allowed_fields(std::string_view role_description);

}  // namespace srpg
