#pragma once

// Domain types shared by every module: PII entities, the structured math
// context, guard outputs, and the canonical forms that define equality
// ("Exact Match") and leak matching.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace srpg {

using Json = nlohmann::json;

enum class PiiKind { PersonName, Location, PhoneNumber, SchoolName, ContactOther, IdNumber };

inline constexpr PiiKind kAllPiiKinds[] = {PiiKind::PersonName,   PiiKind::Location,
                                           PiiKind::PhoneNumber,  PiiKind::SchoolName,
                                           PiiKind::ContactOther, PiiKind::IdNumber};

std::string_view to_string(PiiKind kind);
std::optional<PiiKind> parse_pii_kind(std::string_view name);
// Tie-break priority for overlapping detections; lower wins.
int kind_priority(PiiKind kind);
bool is_numeric_kind(PiiKind kind);  // PhoneNumber, IdNumber

// A located sensitive entity. Offsets are Unicode scalar indices into the
// source text, half-open.
struct PiiSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  PiiKind kind = PiiKind::PersonName;
  std::string surface;
  std::string canonical;

  friend bool operator==(const PiiSpan&, const PiiSpan&) = default;
};

// Ground-truth PII injected into a corpus item.
struct PiiRecord {
  PiiKind kind = PiiKind::PersonName;
  std::string canonical;
  std::vector<std::string> aliases;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  friend bool operator==(const PiiRecord&, const PiiRecord&) = default;
};

struct Quantity {
  std::string value;  // canonical decimal
  std::optional<std::string> unit;
  std::optional<std::string> label;

  friend bool operator==(const Quantity&, const Quantity&) = default;
};

enum class RelationKind { Equation, Inequality, Ratio, OperationPhrase };

std::string_view to_string(RelationKind kind);
std::optional<RelationKind> parse_relation_kind(std::string_view name);

struct Relation {
  RelationKind kind = RelationKind::Equation;
  std::string expression;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct MathContext {
  std::vector<std::string> variables;
  std::vector<Quantity> quantities;
  std::vector<Relation> relations;
  std::optional<std::string> target;

  bool empty() const {
    return variables.empty() && quantities.empty() && relations.empty() && !target;
  }
  friend bool operator==(const MathContext&, const MathContext&) = default;
};

// Configured set of unit tokens. Units never contain the serialization
// separators ", [ ] | :", operator characters or whitespace.
class UnitLexicon {
 public:
  UnitLexicon() = default;
  explicit UnitLexicon(std::set<std::string, std::less<>> units);

  static UnitLexicon defaults();
  static UnitLexicon load(const std::string& path);

  bool contains(std::string_view unit) const { return units_.find(unit) != units_.end(); }
  const std::set<std::string, std::less<>>& units() const { return units_; }

 private:
  std::set<std::string, std::less<>> units_;
};

enum class GuardMethod { None, Naive, PureLLM, EPE, SRPG };

std::string_view to_string(GuardMethod method);
std::optional<GuardMethod> parse_guard_method(std::string_view name);

// One masked region of GuardOutput::masked_text.
struct AuditRecord {
  std::size_t start = 0;  // scalar offsets into masked_text
  std::size_t end = 0;
  std::string placeholder;
  std::string kind;    // PiiKind name or "Ambiguous"
  std::string stream;  // "sanitization" or a baseline name

  friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

struct GuardOutput {
  std::string id;
  GuardMethod method = GuardMethod::None;
  std::string backend;
  std::string masked_text;
  std::optional<MathContext> context;
  std::string fused_text;
  std::vector<AuditRecord> audit;
  bool degraded = false;
  std::optional<std::string> backend_error;

  friend bool operator==(const GuardOutput&, const GuardOutput&) = default;
};

// ---- canonical forms ------------------------------------------------------

// Case-folded, punctuation-stripped, whitespace-collapsed normal form.
// PhoneNumber and IdNumber reduce to their digit string.
std::string canonicalize_pii(PiiKind kind, std::string_view surface);

// Characters allowed in relation expressions and targets: ASCII
// alphanumerics, space and + - * / = < > ( ) . _
bool in_canonical_alphabet(char c);

std::string normalize_label(std::string_view label);
std::string normalize_target(std::string_view target);
// Re-spaces an expression token by token and normalizes numeric literals.
// Throws ValidationError on characters outside the canonical alphabet.
std::string normalize_expression(std::string_view expression);
RelationKind infer_relation_kind(std::string_view expression);

// Normalizes every field and sorts into canonical order. Variables and
// relations are deduplicated; quantities keep multiplicity. Throws
// ValidationError on invalid numbers or expressions.
MathContext normalize_context(const MathContext& ctx);

// `vars:[..]|qty:[..]|rel:[..]|target:..` with sorted lists; see
// docs/canonical-form.md.
std::string canonical_serialize(const MathContext& ctx);
// Inverse of canonical_serialize. Relation kinds are inferred from the
// expression. Throws ValidationError on malformed input.
MathContext deserialize_context(std::string_view text);

bool contexts_equal(const MathContext& a, const MathContext& b);

// Human-readable item list used by fusion: "{Triangle ABC, Side AB=5, ...}".
// Variables, then quantities ("Label=value unit"), relations, and
// "Target: text". Distinct normalized contexts render distinctly.
std::string render_supplement(const MathContext& ctx);
// Inverse of render_supplement; accepts the text between the braces.
// Throws ValidationError on items that fit no item shape.
MathContext parse_supplement(std::string_view items);

// ---- leak matching --------------------------------------------------------

// Precomputed canonical views of one text for repeated alias lookups.
class LeakScanner {
 public:
  explicit LeakScanner(std::string_view text);

  // Textual aliases match case-insensitively on word boundaries after
  // punctuation is either dropped or turned into spaces. Numeric kinds match
  // when the alias digit string (>= 7 digits) is a substring of any digit
  // group of the text.
  bool contains(PiiKind kind, std::string_view alias) const;

 private:
  std::string dropped_;   // " " + punctuation removed + " "
  std::string spaced_;    // " " + punctuation as space + " "
  std::vector<std::string> digit_groups_;
};

// Aliases (plus canonical value) of `records` found in `text`.
struct LeakHit {
  PiiKind kind;
  std::string alias;
};
std::vector<LeakHit> find_leaks(std::string_view text, const std::vector<PiiRecord>& records);

// ---- JSON -----------------------------------------------------------------

void to_json(Json& j, const Quantity& q);
void from_json(const Json& j, Quantity& q);
void to_json(Json& j, const Relation& r);
void from_json(const Json& j, Relation& r);
void to_json(Json& j, const MathContext& c);
void from_json(const Json& j, MathContext& c);
void to_json(Json& j, const PiiSpan& s);
void from_json(const Json& j, PiiSpan& s);
void to_json(Json& j, const PiiRecord& r);
void from_json(const Json& j, PiiRecord& r);
void to_json(Json& j, const AuditRecord& a);
void from_json(const Json& j, AuditRecord& a);
void to_json(Json& j, const GuardOutput& g);
void from_json(const Json& j, GuardOutput& g);

}  // namespace srpg
