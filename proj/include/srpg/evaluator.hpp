#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srpg/core_model.hpp"
#include "srpg/corpus.hpp"
#include "srpg/guard_pipeline.hpp"
#include "srpg/reconstructor.hpp"

namespace srpg {

struct AttackResult {
  std::string id;
  std::vector<LeakHit> leaked;
  bool success = false;  // == !leaked.empty()
};

// Canonical-matching adversary over the text the Tutor receives.
AttackResult attack(std::string_view output_text, const std::vector<PiiRecord>& gold_pii,
                    const std::string& id = {});

// Throws ValidationError on an empty list.
double compute_asr(const std::vector<AttackResult>& results);

// Display rounding (4 places).
double round4(double x);

// Missing predictions score 0. Sizes must agree.
double exact_match_rate(const std::vector<std::optional<MathContext>>& pred, const std::vector<MathContext>& gold);

// Multiset overlap on (value, unit) over |gold quantities|; 1.0 when gold has
// none.
double key_param_recall(const MathContext& pred, const MathContext& gold);

// Context the Tutor can work from: the emitted one, else whatever the
// deterministic parser finds in fused_text.
MathContext tutor_context(const GuardOutput& output, const ContextReconstructor& reconstructor);

// With a gold answer and template: the template solver on the tutor context
// must reproduce the answer. Otherwise recall must be 1 and relation counts
// must agree.
bool hard_solvability(const GuardOutput& output, const DialogueItem& gold, const TemplateLibrary* templates,
                      const ContextReconstructor& reconstructor);

struct CompositeWeights {
  double privacy = 0.5;
  double utility = 0.5;
  double exact_match = 1.0 / 3;
  double key_param_recall = 1.0 / 3;
  double hard_solvability = 1.0 / 3;

  // Each side must be non-negative and sum to 1; throws ConfigError.
  void validate() const;
  static CompositeWeights from_json(const Json& j);
  static CompositeWeights load(const std::string& path);
};

struct ItemMetrics {
  std::string id;
  bool attack_success = false;
  std::vector<LeakHit> leaked;
  bool exact_match = false;
  double key_param_recall = 0.0;
  bool hard_solvable = false;
};

struct MetricsReport {
  std::string method;
  std::string backend;
  std::string corpus_sha256;
  std::string config_sha256;
  std::size_t items = 0;
  double asr = 0.0;
  double exact_match_rate = 0.0;
  double key_param_recall = 0.0;
  double hard_solvability = 0.0;
  double composite = 0.0;
  CompositeWeights weights;
  std::vector<ItemMetrics> per_item;
  std::string generated_at;  // not part of the hashed payload

  // Everything except generated_at.
  Json payload() const;
  std::string payload_sha256() const;
};

double composite_score(const MetricsReport& report, const CompositeWeights& weights);

void to_json(Json& j, const MetricsReport& r);
void from_json(const Json& j, MetricsReport& r);

struct EvalInputs {
  const ContextReconstructor* reconstructor = nullptr;
  const TemplateLibrary* templates = nullptr;  // for hard solvability
  CompositeWeights weights;
  std::string config_sha256;  // caller's configuration fingerprint
};

// Scores guard outputs against the gold corpus. Ids must match one-to-one
// (order may differ); otherwise ValidationError lists them.
MetricsReport evaluate_outputs(const std::vector<GuardOutput>& pred, const std::vector<InjectedItem>& gold,
                               const EvalInputs& inputs);

// Runs `guard` over the corpus, then evaluate_outputs. Guard failures are
// collected and rethrown as one GuardError naming every failed id.
MetricsReport evaluate_corpus(const std::vector<InjectedItem>& corpus, const Guard& guard,
                              const EvalInputs& inputs);

// Fixed-width table, one row per report, values rounded to 4 places.
std::string format_table(const std::vector<MetricsReport>& reports);

// UTC, ISO 8601.
std::string utc_timestamp();

}  // namespace srpg
