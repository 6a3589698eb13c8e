#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "srpg/core_model.hpp"
#include "srpg/llm_client.hpp"
#include "srpg/pii_detector.hpp"

namespace srpg {

struct ContextSchema {
  int version = 1;
  std::set<RelationKind> allowed_relations{RelationKind::Equation, RelationKind::Inequality,
                                           RelationKind::Ratio, RelationKind::OperationPhrase};
  UnitLexicon units = UnitLexicon::defaults();
  std::size_t max_quantities = 32;
  std::size_t max_relations = 32;
  std::vector<std::string> required_keys{"variables", "quantities", "relations", "target"};

  // Description embedded into prompts.
  Json describe() const;
};

// Parses a model response into a context. Accepts one JSON object, optionally
// inside a ``` fence, with exactly the schema keys. Throws SchemaError with
// code parse_error, unknown_key, missing_key, limit_exceeded or
// invalid_value.
MathContext validate_schema(std::string_view response, const ContextSchema& schema);

// Prompt template with {{schema}} and {{input}} placeholders.
struct PromptTemplate {
  std::string text;

  static PromptTemplate load(const std::string& path);
  std::string render(const ContextSchema& schema, std::string_view input) const;
};

struct ReconstructionResult {
  MathContext context;
  bool degraded = false;                // fell back to the deterministic parser
  std::optional<std::string> failure;  // error code that caused the fallback
  int attempts = 0;                     // model calls made
};

class ContextReconstructor {
 public:
  ContextReconstructor(std::shared_ptr<const Gazetteer> gazetteer, ContextSchema schema = {});

  // Grammar-based extraction. A "Context Supplement: {...}" block in the
  // text is taken as the context when present.
  MathContext reconstruct_deterministic(std::string_view text) const;

  // Prompted extraction with one repair retry, then deterministic fallback.
  // `input` is what the model sees; `fallback_text` feeds the fallback.
  ReconstructionResult reconstruct_llm(std::string_view input, LlmClient& client,
                                       const PromptTemplate& prompt,
                                       std::optional<std::string_view> fallback_text = std::nullopt,
                                       const std::string& request_id = {}) const;

  // Removes detected identifiers from every text field.
  MathContext leak_filter(const MathContext& ctx) const;

  const ContextSchema& schema() const { return schema_; }
  const Gazetteer& gazetteer() const { return *gazetteer_; }

 private:
  MathContext extract(std::string_view text) const;
  MathContext limit(MathContext ctx) const;

  std::shared_ptr<const Gazetteer> gazetteer_;
  ContextSchema schema_;
};

}  // namespace srpg
