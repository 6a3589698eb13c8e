#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "srpg/core_model.hpp"
#include "srpg/pii_detector.hpp"

namespace srpg {

class ContextReconstructor;

// Portable seeded generator. Bounded draws use rejection sampling so that
// sequences do not depend on the standard library's distributions.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  std::uint64_t below(std::uint64_t n);                // [0, n)
  std::int64_t between(std::int64_t lo, std::int64_t hi);  // [lo, hi]

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t fnv1a(std::string_view s);

struct DialogueItem {
  std::string id;
  std::string turn_text;
  MathContext gold_context;
  std::optional<std::string> gold_answer;
  std::optional<std::string> template_id;

  friend bool operator==(const DialogueItem&, const DialogueItem&) = default;
};

struct ParamSpec {
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::vector<std::string> values;  // when non-empty, draw from these
};

struct ProblemTemplate {
  std::string id;
  std::string category;
  std::string text;
  std::vector<std::pair<std::string, ParamSpec>> params;     // sorted by name
  std::vector<std::pair<std::string, std::string>> derived;  // name, expression
  Json gold;  // MathContext JSON with {slot} placeholders
  std::string answer;
};

class TemplateLibrary {
 public:
  static TemplateLibrary load(const std::string& path);
  static TemplateLibrary from_json(const Json& j, const std::string& source = "<json>");

  const std::vector<ProblemTemplate>& templates() const { return templates_; }
  const ProblemTemplate* find(std::string_view id) const;

 private:
  std::vector<ProblemTemplate> templates_;
};

// Replaces every "{name}" in `text` by its binding. Unknown names throw
// ConfigError.
std::string fill_slots(std::string_view text, const std::map<std::string, std::string, std::less<>>& slots);

std::vector<DialogueItem> generate_synthetic(std::uint64_t seed, std::size_t count,
                                             const TemplateLibrary& templates);

// Binds the template's parameters from an extracted context and evaluates
// the answer. Quantities bind on (unit, label); every instantiated gold
// relation must be present. Returns nullopt when no binding works or when
// bindings disagree on the answer.
std::optional<std::string> solve_template(const ProblemTemplate& tmpl, const MathContext& extracted);

struct IngestResult {
  std::vector<DialogueItem> items;
  std::vector<std::pair<std::size_t, std::string>> skipped;  // line, reason
  std::vector<std::string> warnings;
};

// MathDial-style JSONL with at least {id, student_turn_text, problem_text}.
// Gold contexts come from the deterministic reconstructor (silver standard).
IngestResult ingest_mathdial(const std::string& path, const ContextReconstructor& reconstructor);

struct PiiProfile {
  struct Field {
    std::string canonical;
    std::vector<std::string> aliases;  // aliases.front() is the full form
  };
  Field person_name;
  Field location;
  Field phone;
  Field school;
};

std::vector<PiiProfile> load_profiles(const std::string& path);

enum class InjectionStyle { Free, Structured, Entangled };
std::string_view to_string(InjectionStyle style);
std::optional<InjectionStyle> parse_injection_style(std::string_view name);

struct InjectionBank {
  struct Sentence {
    std::string id;
    std::string text;
    bool entangled = false;
  };
  struct Field {
    std::string key;
    std::string slot;
  };
  std::vector<Sentence> pii_sentences;
  std::vector<std::string> noise;
  std::vector<Field> structured_fields;
  std::string structured_problem_key = "problem";

  static InjectionBank load(const std::string& path);
};

struct InjectedItem {
  DialogueItem base;
  std::string injected_text;
  std::vector<PiiRecord> pii;
  std::vector<std::pair<std::size_t, std::size_t>> noise_spans;  // scalar offsets
  InjectionStyle style = InjectionStyle::Free;

  friend bool operator==(const InjectedItem&, const InjectedItem&) = default;
};

// Splices 1-3 PII sentences (plus 0-2 noise sentences) into the turn at
// sentence boundaries, or renders "key: value" fields for the structured
// style. The style is drawn from the seed unless given. `gazetteer`
// supplies the second location of entangled sentences.
InjectedItem inject_pii(const DialogueItem& item, const PiiProfile& profile, std::uint64_t seed,
                        const InjectionBank& bank, const Gazetteer& gazetteer,
                        std::optional<InjectionStyle> style = std::nullopt);

// inject_pii over a list; each item's profile is drawn from (seed, id).
std::vector<InjectedItem> inject_corpus(const std::vector<DialogueItem>& items, const std::vector<PiiProfile>& profiles,
                                        std::uint64_t seed, const InjectionBank& bank, const Gazetteer& gazetteer,
                                        std::optional<InjectionStyle> style = std::nullopt);

void to_json(Json& j, const DialogueItem& d);
void from_json(const Json& j, DialogueItem& d);
void to_json(Json& j, const InjectedItem& d);
void from_json(const Json& j, InjectedItem& d);

// One JSON object per line. Loaders report "path:line: reason" and reject
// duplicate ids.
void save_dialogues(const std::vector<DialogueItem>& items, const std::string& path);
std::vector<DialogueItem> load_dialogues(const std::string& path);
void save_corpus(const std::vector<InjectedItem>& items, const std::string& path);
std::vector<InjectedItem> load_corpus(const std::string& path);
std::string to_jsonl(const std::vector<InjectedItem>& items);

}  // namespace srpg
