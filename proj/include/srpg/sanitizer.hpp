#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srpg/core_model.hpp"
#include "srpg/pii_detector.hpp"

namespace srpg {

inline constexpr std::string_view kMask = "[MASK]";

struct Replacement {
  std::size_t start = 0;  // scalar offsets into the source text
  std::size_t end = 0;
  std::string original;
  std::string placeholder{kMask};
  std::optional<PiiKind> kind;  // nullopt: ambiguous number
  std::size_t masked_start = 0;  // scalar offsets into MaskedText::text
  std::size_t masked_end = 0;

  friend bool operator==(const Replacement&, const Replacement&) = default;
};

struct MaskedText {
  std::string text;
  std::vector<Replacement> replacements;  // left to right
};

// Replaces every detection and every ambiguous number with "[MASK]".
// Masking is repeated until detection over the output finds nothing.
MaskedText strict_mask(std::string_view text, const Gazetteer& gazetteer,
                       const DetectionPolicy& policy = DetectionPolicy::strict(),
                       const UnitLexicon& units = UnitLexicon::defaults());

// True when no alias of `gold` survives in the text.
bool verify_no_leak(std::string_view text, const std::vector<PiiRecord>& gold);
bool verify_no_leak(const MaskedText& masked, const std::vector<PiiRecord>& gold);

// Detector hits turned into records (surface as the only alias) so the
// leak check can run without ground truth.
std::vector<PiiRecord> records_from_spans(const std::vector<PiiSpan>& spans);

}  // namespace srpg
