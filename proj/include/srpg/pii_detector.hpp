#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "srpg/core_model.hpp"
#include "srpg/text.hpp"

namespace srpg {

struct GazetteerEntry {
  PiiKind kind = PiiKind::PersonName;
  std::string canonical;
  std::vector<std::string> aliases;
};

// Known surface forms per PII kind. Lookup is case-insensitive and works on
// word tokens, so "haidian district" and "Haidian  District" both hit.
class Gazetteer {
 public:
  Gazetteer() = default;

  // Top-level keys are PiiKind names; values are arrays of
  // {"canonical": ..., "aliases": [...]}.
  static Gazetteer from_json(const Json& j, const std::string& source = "<json>");
  static Gazetteer load(const std::string& path);

  const std::vector<GazetteerEntry>& entries(PiiKind kind) const;
  std::size_t size(PiiKind kind) const { return entries(kind).size(); }

  struct Match {
    std::size_t begin;  // byte offsets
    std::size_t end;
    const GazetteerEntry* entry;
  };
  // All alias occurrences (overlapping allowed) in a tokenized text.
  std::vector<Match> find_all(std::string_view text, const std::vector<text::Token>& tokens) const;

  // Entry of a numeric kind whose canonical digit string equals `digits`.
  const GazetteerEntry* find_digits(std::string_view digits) const;

 private:
  struct Pattern {
    std::vector<std::string> words;  // lowercased word/number tokens
    const GazetteerEntry* entry;
  };
  void compile();

  std::map<PiiKind, std::vector<GazetteerEntry>> entries_;
  std::map<std::string, std::vector<Pattern>, std::less<>> by_first_word_;
  std::map<std::string, const GazetteerEntry*, std::less<>> by_digits_;
};

enum class Aggressiveness { Standard, Strict };

struct DetectionPolicy {
  Aggressiveness aggressiveness = Aggressiveness::Strict;
  int numeric_context_window = 3;
  std::set<PiiKind> enabled_kinds{std::begin(kAllPiiKinds), std::end(kAllPiiKinds)};

  static DetectionPolicy strict() { return {}; }
  static DetectionPolicy standard() {
    DetectionPolicy p;
    p.aggressiveness = Aggressiveness::Standard;
    return p;
  }
};

// A detection in byte coordinates of the scanned text.
struct ByteSpan {
  std::size_t begin;
  std::size_t end;
  PiiKind kind;
  std::string canonical;
};

// Non-overlapping detections sorted by begin. Overlaps resolve to the
// longest span, then the leftmost, then kind priority.
std::vector<ByteSpan> detect_pii_bytes(std::string_view text, const Gazetteer& gazetteer,
                                       const DetectionPolicy& policy);

// Same, in Unicode scalar offsets.
std::vector<PiiSpan> detect_pii(std::string_view text, const Gazetteer& gazetteer,
                                const DetectionPolicy& policy);

enum class NumericVerdict { MathQuantity, PossiblePII };

// Token-level form used by the sanitizer and reconstructor. `index` must
// point at a Number or Fraction token.
NumericVerdict classify_numeric_token(const std::vector<text::Token>& tokens,
                                      const std::vector<int>& sentence_ids, std::size_t index,
                                      const DetectionPolicy& policy, const UnitLexicon& units);

// `start`/`end` are scalar offsets that must cover exactly one numeric
// token; throws ValidationError otherwise.
NumericVerdict classify_ambiguous_numeric(std::string_view text, std::size_t start,
                                          std::size_t end, const DetectionPolicy& policy,
                                          const UnitLexicon& units = UnitLexicon::defaults());

}  // namespace srpg
