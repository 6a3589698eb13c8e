#include "srpg/pii_detector.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "srpg/error.hpp"

namespace srpg {
namespace {

using text::Token;
using text::TokenKind;

constexpr std::array<std::string_view, 6> kHonorifics = {"Mr", "Mrs", "Ms", "Miss", "Dr", "Prof"};

constexpr std::array<std::string_view, 17> kAddressCues = {
    "District", "Street", "St",   "Road",   "Rd",     "Avenue", "Ave",    "Lane",    "Boulevard",
    "Blvd",     "City",   "Town", "Village", "County", "Province", "Drive", "Square"};

constexpr std::array<std::string_view, 6> kSchoolCues = {"School",    "Academy",   "College",
                                                         "University", "Institute", "Kindergarten"};

// Capitalized words that never start or extend a proper-noun run on their
// own: math vocabulary and sentence openers.
const std::set<std::string, std::less<>> kWhitelist = {
    "Triangle", "Angle", "Side", "Rectangle", "Square", "Circle", "Point", "Line", "Segment",
    "Area", "Perimeter", "Radius", "Diameter", "Volume", "Find", "Calculate", "Solve", "Compute",
    "Determine", "Work", "Show", "Explain", "What", "How", "Why", "When", "Where", "Which", "Who",
    "If", "In", "On", "At", "For", "From", "To", "Of", "With", "By", "The", "A", "An", "It", "Its",
    "There", "This", "That", "These", "Those", "I", "I'm", "I've", "I'll", "I'd", "My", "Our", "Your", "Me", "We", "You", "He", "She",
    "They", "Hi", "Hello", "Hey", "Thanks", "Thank", "Sorry", "Please", "Yes", "No", "Ok", "Okay",
    "So", "And", "But", "Or", "Then", "Also", "Let", "Given", "Each", "Every", "Is", "Are", "Was",
    "Can", "Could", "Does", "Do", "Did", "Text", "Call", "Monday", "Tuesday", "Wednesday",
    "Thursday", "Friday", "Saturday", "Sunday", "January", "February", "March", "April", "June",
    "July", "August", "September", "October", "November", "December", "Room", "Class", "Grade"};

// Lowercased token sequences after which capitalized words are a name.
const std::vector<std::vector<std::string_view>> kNameCues = {
    {"my", "name", "is"}, {"name", "is"}, {"i'm"}, {"i", "am"}, {"call", "me"}, {"this", "is"},
    {"it's"}};

const std::set<std::string, std::less<>> kIdentifierCues = {
    "room", "no", "id", "class", "grade", "phone", "tel", "telephone", "call", "mobile", "cell",
    "zip", "postal", "apt", "apartment", "building", "floor"};

const std::set<std::string, std::less<>> kMathVerbs = {
    "add", "plus", "minus", "subtract", "times", "multiply", "divide", "divided", "by", "equals"};


bool contains(auto const& range, std::string_view word) {
  return std::find(std::begin(range), std::end(range), word) != std::end(range);
}

bool is_cap(const Token& t) { return t.kind == TokenKind::Word && text::is_capitalized_word(t.text); }

bool is_joiner(const Token& t) {
  if (t.kind == TokenKind::Newline) return false;
  return t.text == "." || t.text == "-" || t.text == "'" || t.text == "@" || t.text == "(" ||
         t.text == ")" || t.text == "_";
}

std::string lower(std::string_view s) { return text::ascii_lower(s); }

std::vector<std::string> alias_words(std::string_view alias) {
  std::vector<std::string> words;
  for (const auto& t : text::tokenize(alias)) {
    if (t.kind == TokenKind::Word || t.kind == TokenKind::Number || t.kind == TokenKind::Fraction) {
      words.push_back(lower(t.text));
    }
  }
  return words;
}

std::string digits_only(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (text::is_ascii_digit(c)) out.push_back(c);
  }
  return out;
}

// Phone-like runs: optional '+' or '(' then digit groups joined by up to
// two of " -.()" ; at least seven digits in total.
void find_phones(std::string_view s, std::vector<ByteSpan>& out) {
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const bool starts = text::is_ascii_digit(c) ||
                        ((c == '+' || c == '(') && i + 1 < s.size() && text::is_ascii_digit(s[i + 1]));
    if (!starts || (i > 0 && text::is_word_byte(s[i - 1]))) {
      ++i;
      continue;
    }
    std::size_t j = (c == '+' || c == '(') ? i + 1 : i;
    std::size_t last_digit_end = j;
    std::size_t digits = 0;
    for (;;) {
      while (j < s.size() && text::is_ascii_digit(s[j])) {
        ++j;
        ++digits;
      }
      last_digit_end = j;
      std::size_t k = j;
      while (k < s.size() && k - j < 2 &&
             (s[k] == ' ' || s[k] == '-' || s[k] == '.' || s[k] == '(' || s[k] == ')')) {
        ++k;
      }
      if (k > j && k < s.size() && text::is_ascii_digit(s[k])) {
        j = k;
        continue;
      }
      break;
    }
    std::size_t end = last_digit_end;
    if (c == '(' && end < s.size() && s[end] == ')') ++end;
    const bool word_after = last_digit_end < s.size() && text::is_ascii_alpha(s[last_digit_end]);
    if (digits >= 7 && !word_after) {
      out.push_back({i, end, PiiKind::PhoneNumber, ""});
    }
    i = std::max(last_digit_end, i + 1);
  }
}

bool email_local(char c) {
  return text::is_ascii_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}
bool email_domain(char c) { return text::is_ascii_alnum(c) || c == '.' || c == '-'; }

void find_contacts(std::string_view s, std::vector<ByteSpan>& out) {
  for (std::size_t at = 0; at < s.size(); ++at) {
    if (s[at] != '@') continue;
    std::size_t b = at;
    while (b > 0 && email_local(s[b - 1])) --b;
    while (b < at && !text::is_ascii_alnum(s[b])) ++b;
    std::size_t e = at + 1;
    while (e < s.size() && email_domain(s[e])) ++e;
    while (e > at + 1 && !text::is_ascii_alnum(s[e - 1])) --e;
    const auto domain = s.substr(at + 1, e - at - 1);
    const auto dot = domain.rfind('.');
    if (b < at && dot != std::string_view::npos && domain.size() - dot - 1 >= 2) {
      out.push_back({b, e, PiiKind::ContactOther, ""});
      at = e;
      continue;
    }
    // Social handle: "@name" not preceded by a word character.
    if (at == 0 || !text::is_word_byte(s[at - 1])) {
      std::size_t h = at + 1;
      while (h < s.size() && (text::is_ascii_alnum(s[h]) || s[h] == '_')) ++h;
      if (h - at - 1 >= 2) out.push_back({at, h, PiiKind::ContactOther, ""});
    }
  }
}

// Extends a run of capitalized, non-whitelisted words starting at `i`.
// Returns one past the last word index (== i when none).
std::size_t name_run(const std::vector<Token>& toks, std::size_t i, std::size_t max_words = 3) {
  std::size_t j = i;
  while (j < toks.size() && j - i < max_words && is_cap(toks[j]) && !kWhitelist.count(toks[j].text) &&
         (j == i || !toks[j].glued)) {
    // Places are left to the address and school rules.
    if (contains(kAddressCues, toks[j].text) || contains(kSchoolCues, toks[j].text)) return i;
    ++j;
  }
  return j;
}

void find_pattern_names(const std::vector<Token>& toks, std::vector<ByteSpan>& out) {
  for (std::size_t i = 0; i < toks.size(); ++i) {
    // Honorific + capitalized words.
    if (toks[i].kind == TokenKind::Word && contains(kHonorifics, toks[i].text)) {
      std::size_t j = i + 1;
      if (j < toks.size() && toks[j].text == "." && toks[j].glued) ++j;
      const std::size_t e = name_run(toks, j);
      if (e > j) out.push_back({toks[i].begin, toks[e - 1].end, PiiKind::PersonName, ""});
    }
    // Cue phrase + capitalized words.
    for (const auto& cue : kNameCues) {
      if (i + cue.size() > toks.size()) continue;
      bool match = true;
      for (std::size_t k = 0; k < cue.size() && match; ++k) {
        match = toks[i + k].kind == TokenKind::Word && lower(toks[i + k].text) == cue[k];
      }
      if (!match) continue;
      const std::size_t j = i + cue.size();
      const std::size_t e = name_run(toks, j);
      if (e > j) out.push_back({toks[j].begin, toks[e - 1].end, PiiKind::PersonName, ""});
    }
  }
}

void find_places(const std::vector<Token>& toks, std::vector<ByteSpan>& out) {
  for (std::size_t i = 1; i < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::Word) continue;
    const bool address = contains(kAddressCues, toks[i].text);
    const bool school = contains(kSchoolCues, toks[i].text);
    if (!address && !school) continue;
    std::size_t b = i;
    std::size_t caps = 0;
    while (b > 0) {
      const Token& p = toks[b - 1];
      if (is_cap(p) && !kWhitelist.count(p.text)) {
        ++caps;
      } else if (school && p.kind == TokenKind::Number && b >= 3 && toks[b - 2].text == "." &&
                 toks[b - 3].text == "No") {
        // "No. 2 Middle School"
      } else if (school && p.text == "." && b >= 2 && toks[b - 2].text == "No") {
      } else if (school && p.text == "No") {
      } else {
        break;
      }
      --b;
    }
    if (caps == 0) continue;
    // Optional house number before a street address: "12 Park Road".
    if (address && b > 0 && toks[b - 1].kind == TokenKind::Number && !toks[b].glued) --b;
    std::size_t end = toks[i].end;
    out.push_back({toks[b].begin, end, address ? PiiKind::Location : PiiKind::SchoolName, ""});
  }
}

bool id_like(std::string_view w) {
  // [A-Z]{1,2}\d{6,}
  std::size_t letters = 0;
  while (letters < w.size() && w[letters] >= 'A' && w[letters] <= 'Z') ++letters;
  if (letters < 1 || letters > 2) return false;
  const auto rest = w.substr(letters);
  return rest.size() >= 6 &&
         std::all_of(rest.begin(), rest.end(), [](char c) { return text::is_ascii_digit(c); });
}

void find_ids(const std::vector<Token>& toks, std::vector<ByteSpan>& out) {
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind == TokenKind::Word && id_like(toks[i].text)) {
      out.push_back({toks[i].begin, toks[i].end, PiiKind::IdNumber, ""});
      continue;
    }
    if (toks[i].kind != TokenKind::Word || lower(toks[i].text) != "id") continue;
    for (std::size_t j = i + 1; j < toks.size() && j <= i + 3; ++j) {
      const auto& t = toks[j];
      if (t.kind == TokenKind::Newline) break;
      if ((t.kind == TokenKind::Number && t.text.size() >= 4) ||
          (t.kind == TokenKind::Word && digits_only(t.text).size() >= 4)) {
        out.push_back({t.begin, t.end, PiiKind::IdNumber, ""});
        break;
      }
    }
  }
}

void find_capitalized_runs(const std::vector<Token>& toks, std::vector<ByteSpan>& out) {
  std::size_t i = 0;
  while (i < toks.size()) {
    if (!is_cap(toks[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < toks.size() && is_cap(toks[j]) && !toks[j].glued) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && kWhitelist.count(toks[b].text)) ++b;
    while (e > b && kWhitelist.count(toks[e - 1].text)) --e;
    if (e - b >= 2) out.push_back({toks[b].begin, toks[e - 1].end, PiiKind::PersonName, ""});
    i = j;
  }
}

std::vector<ByteSpan> resolve(std::vector<ByteSpan> cands) {
  std::sort(cands.begin(), cands.end(), [](const ByteSpan& a, const ByteSpan& b) {
    const auto la = a.end - a.begin;
    const auto lb = b.end - b.begin;
    if (la != lb) return la > lb;
    if (a.begin != b.begin) return a.begin < b.begin;
    return kind_priority(a.kind) < kind_priority(b.kind);
  });
  std::vector<ByteSpan> kept;
  for (auto& c : cands) {
    const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const ByteSpan& k) {
      return c.begin < k.end && k.begin < c.end;
    });
    if (!overlaps) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(),
            [](const ByteSpan& a, const ByteSpan& b) { return a.begin < b.begin; });
  return kept;
}

}  // namespace

// ---- Gazetteer ------------------------------------------------------------

Gazetteer Gazetteer::from_json(const Json& j, const std::string& source) {
  if (!j.is_object()) throw SchemaError("parse_error", source + ": gazetteer must be a JSON object");
  Gazetteer g;
  for (const auto& [key, value] : j.items()) {
    const auto kind = parse_pii_kind(key);
    if (!kind) throw SchemaError("unknown_key", source + ": unknown PII kind '" + key + "'");
    if (!value.is_array()) {
      throw SchemaError("invalid_value", source + ": entries of '" + key + "' must be an array");
    }
    std::set<std::string> seen;
    auto& list = g.entries_[*kind];
    for (std::size_t idx = 0; idx < value.size(); ++idx) {
      const auto& e = value[idx];
      const std::string where = source + ": " + key + "[" + std::to_string(idx) + "]";
      if (!e.is_object() || !e.contains("canonical") || !e["canonical"].is_string()) {
        throw SchemaError("missing_key", where + ": expected {\"canonical\", \"aliases\"}");
      }
      for (const auto& [field, _] : e.items()) {
        if (field != "canonical" && field != "aliases") {
          throw SchemaError("unknown_key", where + ": unknown field '" + field + "'");
        }
      }
      GazetteerEntry entry;
      entry.kind = *kind;
      entry.canonical = e["canonical"].get<std::string>();
      if (entry.canonical.empty()) throw ValidationError(where + ": empty canonical value");
      if (!e.contains("aliases") || !e["aliases"].is_array() || e["aliases"].empty()) {
        throw ValidationError(where + ": alias list must be non-empty");
      }
      for (const auto& a : e["aliases"]) {
        if (!a.is_string() || a.get<std::string>().empty() ||
            alias_words(a.get<std::string>()).empty()) {
          throw ValidationError(where + ": aliases must be non-empty strings");
        }
        entry.aliases.push_back(a.get<std::string>());
      }
      if (!seen.insert(entry.canonical).second) {
        throw ValidationError(where + ": duplicate canonical value '" + entry.canonical + "'");
      }
      list.push_back(std::move(entry));
    }
  }
  g.compile();
  return g;
}

Gazetteer Gazetteer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gazetteer '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SchemaError("parse_error", path + ": " + e.what(), e.byte);
  }
  return from_json(j, path);
}

void Gazetteer::compile() {
  by_first_word_.clear();
  by_digits_.clear();
  for (const auto& [kind, list] : entries_) {
    for (const auto& e : list) {
      if (is_numeric_kind(kind)) {
        const auto d = digits_only(e.canonical);
        if (!d.empty()) by_digits_.emplace(d, &e);
      }
      for (const auto& a : e.aliases) {
        auto words = alias_words(a);
        const std::string first = words.front();
        by_first_word_[first].push_back(Pattern{std::move(words), &e});
      }
    }
  }
}

const std::vector<GazetteerEntry>& Gazetteer::entries(PiiKind kind) const {
  static const std::vector<GazetteerEntry> kEmpty;
  const auto it = entries_.find(kind);
  return it == entries_.end() ? kEmpty : it->second;
}

const GazetteerEntry* Gazetteer::find_digits(std::string_view digits) const {
  const auto it = by_digits_.find(digits);
  return it == by_digits_.end() ? nullptr : it->second;
}

std::vector<Gazetteer::Match> Gazetteer::find_all(std::string_view,
                                                  const std::vector<Token>& tokens) const {
  // Indices of word-like tokens; joiners between them are skipped.
  std::vector<std::size_t> words;
  std::vector<std::string> lowered;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto k = tokens[i].kind;
    if (k == TokenKind::Word || k == TokenKind::Number || k == TokenKind::Fraction) {
      words.push_back(i);
      auto w = lower(tokens[i].text);
      // Possessives match the bare alias: "Alice's" -> "alice".
      if (w.size() > 2 && w.compare(w.size() - 2, 2, "'s") == 0) w.resize(w.size() - 2);
      lowered.push_back(std::move(w));
    }
  }
  auto joined = [&](std::size_t w) {
    // True when word w and w+1 are separated only by up to two joiners.
    const std::size_t a = words[w];
    const std::size_t b = words[w + 1];
    if (b - a - 1 > 2) return false;
    for (std::size_t k = a + 1; k < b; ++k) {
      if (!is_joiner(tokens[k])) return false;
    }
    return true;
  };

  std::vector<Match> out;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto it = by_first_word_.find(lowered[w]);
    if (it == by_first_word_.end()) continue;
    for (const auto& p : it->second) {
      if (w + p.words.size() > words.size()) continue;
      bool ok = true;
      for (std::size_t k = 1; k < p.words.size() && ok; ++k) {
        ok = lowered[w + k] == p.words[k] && joined(w + k - 1);
      }
      if (ok) {
        out.push_back(Match{tokens[words[w]].begin, tokens[words[w + p.words.size() - 1]].end, p.entry});
      }
    }
  }
  return out;
}

// ---- detection ------------------------------------------------------------

std::vector<ByteSpan> detect_pii_bytes(std::string_view s, const Gazetteer& gazetteer,
                                       const DetectionPolicy& policy) {
  const auto toks = text::tokenize(s);
  std::vector<ByteSpan> cands;
  for (const auto& m : gazetteer.find_all(s, toks)) {
    cands.push_back({m.begin, m.end, m.entry->kind, m.entry->canonical});
  }
  find_phones(s, cands);
  find_contacts(s, cands);
  find_pattern_names(toks, cands);
  find_places(toks, cands);
  find_ids(toks, cands);
  if (policy.aggressiveness == Aggressiveness::Strict) {
    std::vector<ByteSpan> runs;
    find_capitalized_runs(toks, runs);
    for (auto& r : runs) {
      const bool duplicate = std::any_of(cands.begin(), cands.end(), [&](const ByteSpan& c) {
        return c.begin == r.begin && c.end == r.end;
      });
      if (!duplicate) cands.push_back(std::move(r));
    }
  }
  std::erase_if(cands, [&](const ByteSpan& c) { return !policy.enabled_kinds.count(c.kind); });

  auto spans = resolve(std::move(cands));
  for (auto& sp : spans) {
    if (!sp.canonical.empty()) continue;
    const auto surface = s.substr(sp.begin, sp.end - sp.begin);
    if (sp.kind == PiiKind::PhoneNumber) {
      if (const auto* e = gazetteer.find_digits(digits_only(surface))) {
        sp.canonical = e->canonical;
        continue;
      }
    }
    sp.canonical = canonicalize_pii(sp.kind, surface);
  }
  return spans;
}

std::vector<PiiSpan> detect_pii(std::string_view s, const Gazetteer& gazetteer,
                                const DetectionPolicy& policy) {
  const text::OffsetIndex index(s);
  std::vector<PiiSpan> out;
  for (auto& b : detect_pii_bytes(s, gazetteer, policy)) {
    out.push_back(PiiSpan{index.to_scalar(b.begin), index.to_scalar(b.end), b.kind,
                          std::string(s.substr(b.begin, b.end - b.begin)), std::move(b.canonical)});
  }
  return out;
}

// ---- ambiguous numbers ----------------------------------------------------

NumericVerdict classify_numeric_token(const std::vector<Token>& toks,
                                      const std::vector<int>& sentence_ids, std::size_t index,
                                      const DetectionPolicy& policy, const UnitLexicon& units) {
  const int sentence = sentence_ids[index];

  bool cue = false;
  int seen = 0;
  for (std::size_t k = index; k-- > 0 && seen < policy.numeric_context_window;) {
    const auto& t = toks[k];
    if (sentence_ids[k] != sentence || t.kind == TokenKind::Newline) break;
    if (t.kind == TokenKind::Punct || t.kind == TokenKind::Symbol) continue;
    ++seen;
    if (t.kind != TokenKind::Word) continue;
    if (t.text == "No") {
      // Only "No." or "No 5"-style numbering, not the word "no".
      cue = cue || (k + 1 < toks.size() && toks[k + 1].text == ".") || k + 1 == index;
      continue;
    }
    if (kIdentifierCues.count(lower(t.text)) && lower(t.text) != "no") cue = true;
  }

  bool math = false;
  auto op_like = [](const Token& t) {
    return (t.kind == TokenKind::Operator && t.text != "(" && t.text != ")") ||
           t.kind == TokenKind::Comparator;
  };
  if (index > 0 && sentence_ids[index - 1] == sentence) {
    const auto& p = toks[index - 1];
    if (op_like(p) || p.text == "$" || (p.kind == TokenKind::Word && kMathVerbs.count(lower(p.text)))) {
      math = true;
    }
  }
  if (index + 1 < toks.size() && sentence_ids[index + 1] == sentence) {
    const auto& n = toks[index + 1];
    if (op_like(n) || units.contains(n.text)) math = true;
  }

  if (!cue) return NumericVerdict::MathQuantity;
  if (!math) return NumericVerdict::PossiblePII;
  return policy.aggressiveness == Aggressiveness::Strict ? NumericVerdict::PossiblePII
                                                         : NumericVerdict::MathQuantity;
}

NumericVerdict classify_ambiguous_numeric(std::string_view s, std::size_t start, std::size_t end,
                                          const DetectionPolicy& policy, const UnitLexicon& units) {
  const text::OffsetIndex index(s);
  const auto b = index.to_byte(start);
  const auto e = index.to_byte(end);
  const auto toks = text::tokenize(s);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].begin == b && toks[i].end == e &&
        (toks[i].kind == TokenKind::Number || toks[i].kind == TokenKind::Fraction)) {
      return classify_numeric_token(toks, text::sentence_ids(toks), i, policy, units);
    }
  }
  throw ValidationError("span [" + std::to_string(start) + ", " + std::to_string(end) +
                        ") does not cover a numeric token");
}

}  // namespace srpg
