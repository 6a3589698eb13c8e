#include "srpg/sanitizer.hpp"

#include <algorithm>

namespace srpg {
namespace {

struct Cover {
  std::size_t begin;  // source bytes
  std::size_t end;
  std::optional<PiiKind> kind;
};

// One contiguous region of the masked text and where it came from.
struct Piece {
  std::size_t masked_begin;
  std::size_t masked_end;
  std::size_t source_begin;
  std::size_t source_end;
  bool is_mask;
};

void add_cover(std::vector<Cover>& covers, Cover c) {
  std::vector<Cover> out;
  for (const auto& k : covers) {
    if (k.begin < c.end && c.begin < k.end) {
      c.begin = std::min(c.begin, k.begin);
      c.end = std::max(c.end, k.end);
      if (k.kind && (!c.kind || k.begin <= c.begin)) c.kind = k.kind;
    } else {
      out.push_back(k);
    }
  }
  out.push_back(c);
  std::sort(out.begin(), out.end(), [](const Cover& a, const Cover& b) { return a.begin < b.begin; });
  covers = std::move(out);
}

// Everything the strict stream would hide in `s`, in byte coordinates.
std::vector<Cover> findings(std::string_view s, const Gazetteer& gazetteer,
                            const DetectionPolicy& policy, const UnitLexicon& units) {
  std::vector<Cover> out;
  const auto spans = detect_pii_bytes(s, gazetteer, policy);
  for (const auto& sp : spans) out.push_back({sp.begin, sp.end, sp.kind});
  const auto toks = text::tokenize(s);
  const auto ids = text::sentence_ids(toks);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto& t = toks[i];
    if (t.kind != text::TokenKind::Number && t.kind != text::TokenKind::Fraction) continue;
    const bool inside = std::any_of(spans.begin(), spans.end(), [&](const ByteSpan& sp) {
      return t.begin < sp.end && sp.begin < t.end;
    });
    if (inside) continue;
    if (classify_numeric_token(toks, ids, i, policy, units) == NumericVerdict::PossiblePII) {
      out.push_back({t.begin, t.end, std::nullopt});
    }
  }
  std::sort(out.begin(), out.end(), [](const Cover& a, const Cover& b) { return a.begin < b.begin; });
  return out;
}

std::pair<std::string, std::vector<Piece>> render(std::string_view s, const std::vector<Cover>& covers) {
  std::string masked;
  std::vector<Piece> pieces;
  std::size_t pos = 0;
  for (const auto& c : covers) {
    if (c.begin > pos) {
      pieces.push_back({masked.size(), masked.size() + (c.begin - pos), pos, c.begin, false});
      masked.append(s.substr(pos, c.begin - pos));
    }
    pieces.push_back({masked.size(), masked.size() + kMask.size(), c.begin, c.end, true});
    masked.append(kMask);
    pos = c.end;
  }
  if (pos < s.size()) {
    pieces.push_back({masked.size(), masked.size() + (s.size() - pos), pos, s.size(), false});
    masked.append(s.substr(pos));
  }
  return {std::move(masked), std::move(pieces)};
}

std::size_t to_source(const std::vector<Piece>& pieces, std::size_t p, bool is_end) {
  for (const auto& pc : pieces) {
    const bool in = is_end ? (p > pc.masked_begin && p <= pc.masked_end)
                           : (p >= pc.masked_begin && p < pc.masked_end);
    if (!in) continue;
    if (pc.is_mask) return is_end ? pc.source_end : pc.source_begin;
    return pc.source_begin + (p - pc.masked_begin);
  }
  return is_end ? (pieces.empty() ? 0 : pieces.back().source_end) : 0;
}

}  // namespace

MaskedText strict_mask(std::string_view s, const Gazetteer& gazetteer,
                       const DetectionPolicy& policy, const UnitLexicon& units) {
  std::vector<Cover> covers;
  for (auto& c : findings(s, gazetteer, policy, units)) add_cover(covers, c);

  auto [masked, pieces] = render(s, covers);
  // Masking can bring tokens together ("Room Alice 12" -> "Room [MASK] 12");
  // keep going until the output is clean. Coverage only grows, so this ends.
  for (;;) {
    const auto again = findings(masked, gazetteer, policy, units);
    if (again.empty()) break;
    for (const auto& f : again) {
      add_cover(covers, {to_source(pieces, f.begin, false), to_source(pieces, f.end, true), f.kind});
    }
    std::tie(masked, pieces) = render(s, covers);
  }

  MaskedText out;
  out.text = std::move(masked);
  const text::OffsetIndex src(s);
  const text::OffsetIndex dst(out.text);
  for (const auto& pc : pieces) {
    if (!pc.is_mask) continue;
    const auto cover = std::find_if(covers.begin(), covers.end(),
                                    [&](const Cover& c) { return c.begin == pc.source_begin; });
    Replacement r;
    r.start = src.to_scalar(pc.source_begin);
    r.end = src.to_scalar(pc.source_end);
    r.original = std::string(s.substr(pc.source_begin, pc.source_end - pc.source_begin));
    r.kind = cover->kind;
    r.masked_start = dst.to_scalar(pc.masked_begin);
    r.masked_end = dst.to_scalar(pc.masked_end);
    out.replacements.push_back(std::move(r));
  }
  return out;
}

bool verify_no_leak(std::string_view t, const std::vector<PiiRecord>& gold) {
  return find_leaks(t, gold).empty();
}

bool verify_no_leak(const MaskedText& masked, const std::vector<PiiRecord>& gold) {
  return verify_no_leak(masked.text, gold);
}

std::vector<PiiRecord> records_from_spans(const std::vector<PiiSpan>& spans) {
  std::vector<PiiRecord> out;
  out.reserve(spans.size());
  for (const auto& sp : spans) {
    out.push_back(PiiRecord{sp.kind, sp.canonical, {sp.surface}, sp.start, sp.end, sp.surface});
  }
  return out;
}

}  // namespace srpg
