#include "srpg/reconstructor.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "srpg/error.hpp"
#include "srpg/numeric.hpp"

namespace srpg {
namespace {

using text::Token;
using text::TokenKind;

const std::set<std::string, std::less<>> kStopwords = {
    "a", "an", "the", "as", "than", "of", "in", "on", "at", "to", "for", "with", "and", "or",
    "is", "are", "was", "were", "be", "been", "does", "do", "did", "has", "have", "had", "per",
    "each", "every", "how", "what", "many", "much", "more", "less", "fewer", "times", "twice",
    "half", "by", "from", "after", "before", "this", "that", "it", "its", "if", "then", "so",
    "there", "their", "his", "her", "my", "your", "our", "such", "into", "over", "all", "near",
    "about", "same", "but", "not", "will", "can", "would", "should", "also", "still", "only"};

const std::set<std::string, std::less<>> kArticles = {"a", "an", "the"};

const std::set<std::string, std::less<>> kFigures = {
    "triangle", "rectangle", "square",  "circle",  "parallelogram", "trapezoid",
    "quadrilateral", "polygon", "pentagon", "hexagon", "rhombus"};

const std::set<std::string, std::less<>> kParts = {
    "side", "angle", "base", "height", "radius", "diameter", "length", "width",
    "edge", "segment", "line", "arc", "chord"};

// Words trimmed from the ends of a field after identifiers are cut out of it.
const std::set<std::string, std::less<>> kEdgeWords = {
    "from", "to", "in", "at", "of", "the", "and", "with", "for", "near", "a", "an",
    "on", "by", "between", "is", "my", "me", "s"};

const std::vector<std::vector<std::string_view>> kTargetCues = {
    {"how", "many"}, {"how", "much"}, {"how", "far"}, {"how", "long"}, {"how", "fast"},
    {"how", "old"},  {"what", "is"},  {"what", "are"}, {"what's"},     {"find"},
    {"calculate"},   {"solve", "for"}, {"work", "out"}, {"determine"}, {"compute"}};

constexpr std::string_view kSupplementHeader = "Context Supplement: {";

std::string lower(std::string_view s) { return text::ascii_lower(s); }

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

bool is_comparator(const Token& t) { return t.kind == TokenKind::Comparator; }

std::string op_text(const Token& t) {
  if (t.text == "\xC3\x97") return "*";
  if (t.text == "\xC3\xB7") return "/";
  if (t.text == "\xE2\x88\x92") return "-";
  if (t.text == "\xE2\x89\xA4") return "<=";
  if (t.text == "\xE2\x89\xA5") return ">=";
  return std::string(t.text);
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join_words(const std::vector<std::string>& words, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::string trim_edge_words(std::string_view s) {
  auto words = split_words(s);
  while (!words.empty() && kEdgeWords.count(lower(words.front()))) words.erase(words.begin());
  while (!words.empty() && kEdgeWords.count(lower(words.back()))) words.pop_back();
  return join_words(words);
}

// True when every side of every comparator is a parseable arithmetic
// expression.
bool well_formed(const std::string& expr) {
  std::vector<std::string> sides;
  std::string cur;
  std::map<std::string, Rational, std::less<>> names;
  for (const auto& w : split_words(expr)) {
    if (w == "=" || w == "<" || w == ">" || w == "<=" || w == ">=") {
      sides.push_back(cur);
      cur.clear();
      continue;
    }
    if (!w.empty() && (text::is_ascii_alpha(w[0]) || w[0] == '_')) names.emplace(w, Rational(1));
    cur += w + " ";
  }
  sides.push_back(cur);
  for (const auto& side : sides) {
    try {
      evaluate_expression(side, names);
    } catch (const std::invalid_argument&) {
      return false;
    } catch (const std::exception&) {
      // Division by zero or overflow under the dummy binding still parses.
    }
  }
  return true;
}

class Extractor {
 public:
  Extractor(std::string_view text, const Gazetteer& gazetteer, const ContextSchema& schema)
      : s_(text), units_(schema.units), toks_(text::tokenize(text)), ids_(text::sentence_ids(toks_)) {
    const auto pii = detect_pii_bytes(s_, gazetteer, DetectionPolicy::strict());
    blocked_.assign(toks_.size(), false);
    ambiguous_.assign(toks_.size(), false);
    used_.assign(toks_.size(), false);
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      blocked_[i] = std::any_of(pii.begin(), pii.end(), [&](const ByteSpan& sp) {
        return toks_[i].begin < sp.end && sp.begin < toks_[i].end;
      });
      if (!blocked_[i] && is_numeric(i)) {
        ambiguous_[i] = classify_numeric_token(toks_, ids_, i, DetectionPolicy::standard(), units_) ==
                        NumericVerdict::PossiblePII;
      }
    }
  }

  MathContext run() {
    figures();
    assignments();
    equations();
    phrases();
    quantities();
    target();
    return std::move(ctx_);
  }

 private:
  std::size_t n() const { return toks_.size(); }
  bool is_numeric(std::size_t i) const {
    return i < n() && (toks_[i].kind == TokenKind::Number || toks_[i].kind == TokenKind::Fraction);
  }
  bool word(std::size_t i) const { return i < n() && toks_[i].kind == TokenKind::Word && !blocked_[i]; }
  std::string lw(std::size_t i) const { return i < n() ? lower(toks_[i].text) : std::string(); }
  bool is(std::size_t i, std::string_view w) const { return word(i) && lw(i) == w; }
  bool number_ok(std::size_t i) const {
    return i < n() && toks_[i].kind == TokenKind::Number && !blocked_[i] && !ambiguous_[i];
  }
  bool identifier(std::size_t i) const {
    return word(i) && text::is_identifier(toks_[i].text) && toks_[i].text != "MASK";
  }
  bool same_sentence(std::size_t a, std::size_t b) const { return ids_[a] == ids_[b]; }

  void figures() {
    for (std::size_t i = 0; i + 1 < n(); ++i) {
      if (word(i) && kFigures.count(lw(i)) && identifier(i + 1) && !toks_[i + 1].glued) {
        ctx_.variables.push_back(capitalize(lw(i)) + " " + std::string(toks_[i + 1].text));
        used_[i] = used_[i + 1] = true;
      }
    }
  }

  // "side AB=5 cm", "angle C is 90"
  void assignments() {
    for (std::size_t i = 0; i + 3 < n(); ++i) {
      if (!word(i) || !kParts.count(lw(i)) || !identifier(i + 1)) continue;
      const std::size_t eq = i + 2;
      if (!(toks_[eq].text == "=" || is(eq, "is"))) continue;
      const std::size_t v = eq + 1;
      if (!number_ok(v)) continue;
      Quantity q;
      q.value = *normalize_decimal(toks_[v].text);
      q.label = capitalize(lw(i)) + " " + std::string(toks_[i + 1].text);
      std::size_t last = v;
      if (v + 1 < n() && units_.contains(toks_[v + 1].text) && same_sentence(v, v + 1)) {
        q.unit = std::string(toks_[v + 1].text);
        last = v + 1;
      }
      ctx_.quantities.push_back(std::move(q));
      for (std::size_t k = i; k <= last; ++k) used_[k] = true;
    }
  }

  bool operand(std::size_t i) const {
    if (i >= n() || blocked_[i] || used_[i]) return false;
    const auto& t = toks_[i];
    if (t.kind == TokenKind::Number) return !ambiguous_[i];
    if (t.kind == TokenKind::Fraction) return true;
    if (t.kind == TokenKind::Word) {
      return (t.text.size() == 1 && text::is_ascii_alpha(t.text[0])) || identifier(i);
    }
    return false;
  }
  bool op(std::size_t i) const {
    return i < n() && !blocked_[i] && !used_[i] &&
           (toks_[i].kind == TokenKind::Operator || toks_[i].kind == TokenKind::Comparator);
  }
  bool implicit_product(std::size_t i) const {
    // "3y": a number glued to a single letter
    return i > 0 && toks_[i].glued && toks_[i - 1].kind == TokenKind::Number &&
           toks_[i].kind == TokenKind::Word && toks_[i].text.size() == 1;
  }

  void equations() {
    std::size_t i = 0;
    while (i < n()) {
      if (!operand(i) && !(op(i) && (toks_[i].text == "(" || toks_[i].text == "-"))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      bool prev_operand = false;
      while (j < n()) {
        if (operand(j)) {
          if (prev_operand && !implicit_product(j)) break;
          prev_operand = true;
        } else if (op(j)) {
          prev_operand = toks_[j].text == ")";
        } else {
          break;
        }
        ++j;
      }
      emit_equation(i, j);
      i = std::max(j, i + 1);
    }
  }

  void emit_equation(std::size_t b, std::size_t e) {
    while (e > b && op(e - 1) && toks_[e - 1].text != ")") --e;
    std::size_t first_cmp = e;
    for (std::size_t k = b; k < e; ++k) {
      if (is_comparator(toks_[k])) {
        first_cmp = k;
        break;
      }
    }
    if (first_cmp == e) return;
    bool left = false;
    bool right = false;
    for (std::size_t k = b; k < e; ++k) {
      if (operand(k)) (k < first_cmp ? left : right) = true;
    }
    if (!left || !right) return;

    std::vector<std::string> parts;
    bool inequality = false;
    for (std::size_t k = b; k < e; ++k) {
      if (implicit_product(k)) parts.emplace_back("*");
      if (operand(k)) {
        parts.emplace_back(toks_[k].text);
        if (toks_[k].kind == TokenKind::Word) ctx_.variables.emplace_back(toks_[k].text);
      } else {
        parts.push_back(op_text(toks_[k]));
        if (is_comparator(toks_[k]) && toks_[k].text != "=") inequality = true;
      }
    }
    try {
      ctx_.relations.push_back(Relation{inequality ? RelationKind::Inequality : RelationKind::Equation,
                                        normalize_expression(join_words(parts))});
    } catch (const ValidationError&) {
    }
  }

  // Up to two lowercase content words starting at i (articles skipped).
  std::pair<std::string, std::size_t> noun_phrase(std::size_t i) const {
    while (word(i) && kArticles.count(lw(i))) ++i;
    std::vector<std::string> words;
    while (words.size() < 2 && word(i) && text::is_lower_word(toks_[i].text) && !kStopwords.count(lw(i))) {
      words.push_back(lw(i));
      ++i;
    }
    return {join_words(words, "_"), i};
  }

  void add_phrase(RelationKind kind, const std::string& expr) {
    try {
      ctx_.relations.push_back(Relation{kind, normalize_expression(expr)});
    } catch (const ValidationError&) {
    }
  }

  void phrases() {
    for (std::size_t i = 0; i < n(); ++i) {
      // twice / half / N times as many X as Y
      std::string factor;
      if (is(i, "twice")) factor = "2";
      if (is(i, "half")) factor = "0.5";
      if (is(i, "times") && i > 0 && number_ok(i - 1)) factor = std::string(toks_[i - 1].text);
      if (!factor.empty() && is(i + 1, "as") && (is(i + 2, "many") || is(i + 2, "much"))) {
        auto [x, after_x] = noun_phrase(i + 3);
        if (is(after_x, "as")) {
          auto [y, after_y] = noun_phrase(after_x + 1);
          if (!x.empty() && !y.empty()) add_phrase(RelationKind::OperationPhrase, x + " = " + factor + " * " + y);
        }
      }
      // N more / fewer X than Y
      if (number_ok(i) && (is(i + 1, "more") || is(i + 1, "fewer") || is(i + 1, "less"))) {
        auto [x, after_x] = noun_phrase(i + 2);
        if (is(after_x, "than")) {
          auto [y, after_y] = noun_phrase(after_x + 1);
          const std::string sign = is(i + 1, "more") ? " + " : " - ";
          if (!x.empty() && !y.empty()) {
            add_phrase(RelationKind::OperationPhrase, x + " = " + y + sign + std::string(toks_[i].text));
          }
        }
      }
      // A per B
      if (is(i, "per") && i > 0 && same_sentence(i - 1, i)) {
        std::string a;
        const auto& p = toks_[i - 1];
        if (!blocked_[i - 1] && units_.contains(p.text)) {
          a = p.text == "$" ? "dollars" : p.text == "%" ? "percent" : std::string(p.text);
        } else if (number_ok(i - 1) && i >= 2 && toks_[i - 2].text == "$") {
          a = "dollars";
        } else if (word(i - 1) && text::is_lower_word(p.text) && !kStopwords.count(lw(i - 1))) {
          a = lw(i - 1);
        }
        auto [b, after_b] = noun_phrase(i + 1);
        if (!a.empty() && !b.empty() && a.find_first_not_of("abcdefghijklmnopqrstuvwxyz_") == std::string::npos) {
          add_phrase(RelationKind::Ratio, a + " / " + b);
        }
      }
      // ratio of X to Y ... P:Q
      if (is(i, "ratio") && is(i + 1, "of")) {
        auto [x, after_x] = noun_phrase(i + 2);
        if (!is(after_x, "to")) continue;
        auto [y, after_y] = noun_phrase(after_x + 1);
        if (x.empty() || y.empty()) continue;
        for (std::size_t k = after_y; k + 2 < n() && same_sentence(i, k); ++k) {
          if (number_ok(k) && toks_[k + 1].text == ":" && number_ok(k + 2)) {
            add_phrase(RelationKind::Ratio, x + " / " + y + " = " + std::string(toks_[k].text) +
                                                " / " + std::string(toks_[k + 2].text));
            break;
          }
        }
      }
    }
  }

  void quantities() {
    for (std::size_t i = 0; i < n(); ++i) {
      if (!is_numeric(i) || blocked_[i] || ambiguous_[i] || used_[i]) continue;
      Quantity q;
      if (toks_[i].kind == TokenKind::Fraction) {
        const auto r = Rational::parse(toks_[i].text);
        if (!r) continue;
        const auto dec = r->denominator() != 0 ? r->to_decimal() : std::nullopt;
        if (!dec) {
          add_phrase(RelationKind::Ratio, std::to_string(r->numerator()) + " / " +
                                              std::to_string(r->denominator()));
          continue;
        }
        q.value = *dec;
      } else {
        q.value = *normalize_decimal(toks_[i].text);
      }
      std::size_t j = i + 1;
      if (i > 0 && toks_[i - 1].text == "$" && units_.contains("$")) {
        q.unit = "$";
      } else if (j < n() && same_sentence(i, j) && !blocked_[j] && units_.contains(toks_[j].text) &&
                 !implicit_product(j)) {
        q.unit = std::string(toks_[j].text);
        ++j;
      }
      if (word(j) && same_sentence(i, j) && text::is_lower_word(toks_[j].text) &&
          toks_[j].text.size() >= 2 && !kStopwords.count(lw(j)) && !units_.contains(toks_[j].text)) {
        q.label = lw(j);
      }
      ctx_.quantities.push_back(std::move(q));
    }
  }

  void target() {
    std::optional<std::string> first;
    for (std::size_t i = 0; i < n(); ++i) {
      for (const auto& cue : kTargetCues) {
        bool match = true;
        for (std::size_t k = 0; k < cue.size() && match; ++k) match = is(i + k, cue[k]);
        if (!match) continue;
        std::size_t e = i + cue.size();
        bool clean = true;
        while (e < n()) {
          const auto& t = toks_[e];
          if (t.kind == TokenKind::Newline) break;
          if (t.kind == TokenKind::Punct &&
              (t.text == "," || t.text == ":" || t.text == ";" || t.text == "." || t.text == "?" || t.text == "!")) {
            break;
          }
          if (blocked_[e]) clean = false;
          ++e;
        }
        const auto cue_end = toks_[i + cue.size() - 1].end;
        std::string t = lower(s_.substr(toks_[i].begin, cue_end - toks_[i].begin)) +
                        std::string(s_.substr(cue_end, toks_[e - 1].end - cue_end));
        t = text::collapse_whitespace(t);
        if (clean) {
          ctx_.target = std::move(t);
          return;
        }
        if (!first) first = std::move(t);
        break;
      }
    }
    ctx_.target = first;
  }

  std::string_view s_;
  const UnitLexicon& units_;
  std::vector<Token> toks_;
  std::vector<int> ids_;
  std::vector<bool> blocked_;
  std::vector<bool> ambiguous_;
  std::vector<bool> used_;
  MathContext ctx_;
};

std::string strip_fences(std::string_view s) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
  };
  s = trim(s);
  if (s.substr(0, 3) == "```") {
    const auto nl = s.find('\n');
    s = nl == std::string_view::npos ? std::string_view{} : s.substr(nl + 1);
    s = trim(s);
    if (s.size() >= 3 && s.substr(s.size() - 3) == "```") s.remove_suffix(3);
  }
  return std::string(trim(s));
}

}  // namespace

Json ContextSchema::describe() const {
  Json unit_list = Json::array();
  for (const auto& u : units.units()) unit_list.push_back(u);
  Json kinds = Json::array();
  for (auto k : allowed_relations) kinds.push_back(to_string(k));
  return Json{{"version", version},
              {"type", "object"},
              {"keys",
               {{"variables", "array of variable names"},
                {"quantities", "array of {\"value\": decimal string, \"unit\"?: unit, \"label\"?: role}"},
                {"relations", "array of {\"kind\": relation kind, \"expression\": text}"},
                {"target", "what is asked, or null"}}},
              {"units", unit_list},
              {"relation_kinds", kinds},
              {"max_quantities", max_quantities},
              {"max_relations", max_relations}};
}

MathContext validate_schema(std::string_view response, const ContextSchema& schema) {
  const auto body = strip_fences(response);
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw SchemaError("parse_error", std::string("response is not valid JSON: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw SchemaError("invalid_value", "response must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(schema.required_keys.begin(), schema.required_keys.end(), key) ==
        schema.required_keys.end()) {
      throw SchemaError("unknown_key", "unknown key '" + key + "'");
    }
  }
  for (const auto& key : schema.required_keys) {
    if (!j.contains(key)) throw SchemaError("missing_key", "missing key '" + key + "'");
  }
  auto bad = [](const std::string& what) { return SchemaError("invalid_value", what); };

  MathContext ctx;
  if (!j["variables"].is_array()) throw bad("variables must be an array");
  for (const auto& v : j["variables"]) {
    if (!v.is_string()) throw bad("variables must be strings");
    ctx.variables.push_back(v.get<std::string>());
  }

  if (!j["quantities"].is_array()) throw bad("quantities must be an array");
  if (j["quantities"].size() > schema.max_quantities) {
    throw SchemaError("limit_exceeded", std::to_string(j["quantities"].size()) +
                                            " quantities exceed the limit of " +
                                            std::to_string(schema.max_quantities));
  }
  for (const auto& q : j["quantities"]) {
    if (!q.is_object()) throw bad("quantities must be objects");
    for (const auto& [key, _] : q.items()) {
      if (key != "value" && key != "unit" && key != "label") {
        throw SchemaError("unknown_key", "unknown quantity key '" + key + "'");
      }
    }
    if (!q.contains("value")) throw SchemaError("missing_key", "quantity without 'value'");
    Quantity out;
    const auto& v = q["value"];
    if (v.is_string()) {
      out.value = v.get<std::string>();
    } else if (v.is_number()) {
      out.value = v.dump();
    } else {
      throw bad("quantity value must be a string or number");
    }
    if (q.contains("unit") && !q["unit"].is_null()) {
      if (!q["unit"].is_string()) throw bad("unit must be a string");
      const auto u = q["unit"].get<std::string>();
      if (!u.empty()) {
        if (!schema.units.contains(u)) throw bad("unit '" + u + "' is not in the unit lexicon");
        out.unit = u;
      }
    }
    if (q.contains("label") && !q["label"].is_null()) {
      if (!q["label"].is_string()) throw bad("label must be a string");
      out.label = q["label"].get<std::string>();
    }
    ctx.quantities.push_back(std::move(out));
  }

  if (!j["relations"].is_array()) throw bad("relations must be an array");
  if (j["relations"].size() > schema.max_relations) {
    throw SchemaError("limit_exceeded", std::to_string(j["relations"].size()) +
                                            " relations exceed the limit of " +
                                            std::to_string(schema.max_relations));
  }
  for (const auto& r : j["relations"]) {
    Relation out;
    if (r.is_string()) {
      out.expression = r.get<std::string>();
      out.kind = infer_relation_kind(out.expression);
    } else if (r.is_object()) {
      for (const auto& [key, _] : r.items()) {
        if (key != "kind" && key != "expression") {
          throw SchemaError("unknown_key", "unknown relation key '" + key + "'");
        }
      }
      if (!r.contains("expression") || !r["expression"].is_string()) {
        throw SchemaError("missing_key", "relation without string 'expression'");
      }
      out.expression = r["expression"].get<std::string>();
      if (r.contains("kind")) {
        const auto k = r["kind"].is_string() ? parse_relation_kind(r["kind"].get<std::string>()) : std::nullopt;
        if (!k) throw bad("unknown relation kind " + r["kind"].dump());
        out.kind = *k;
      } else {
        out.kind = infer_relation_kind(out.expression);
      }
    } else {
      throw bad("relations must be strings or objects");
    }
    if (!schema.allowed_relations.count(out.kind)) {
      throw bad("relation kind '" + std::string(to_string(out.kind)) + "' is not allowed");
    }
    ctx.relations.push_back(std::move(out));
  }

  const auto& t = j["target"];
  if (t.is_string()) {
    if (!t.get<std::string>().empty()) ctx.target = t.get<std::string>();
  } else if (!t.is_null()) {
    throw bad("target must be a string or null");
  }

  try {
    return normalize_context(ctx);
  } catch (const ValidationError& e) {
    throw bad(e.what());
  }
}

PromptTemplate PromptTemplate::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prompt template '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  PromptTemplate t{ss.str()};
  if (t.text.find("{{input}}") == std::string::npos) {
    throw ConfigError("prompt template '" + path + "' has no {{input}} placeholder");
  }
  return t;
}

std::string PromptTemplate::render(const ContextSchema& schema, std::string_view input) const {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const auto open = text.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = text.find("}}", open);
    if (close == std::string::npos) break;
    const auto name = std::string_view(text).substr(open + 2, close - open - 2);
    out.append(text, pos, open - pos);
    if (name == "schema") {
      out += schema.describe().dump();
    } else if (name == "input") {
      out += input;
    } else {
      out.append(text, open, close + 2 - open);
    }
    pos = close + 2;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

ContextReconstructor::ContextReconstructor(std::shared_ptr<const Gazetteer> gazetteer, ContextSchema schema)
    : gazetteer_(std::move(gazetteer)), schema_(std::move(schema)) {
  if (!gazetteer_) throw ConfigError("reconstructor needs a gazetteer");
  if (schema_.max_quantities == 0 || schema_.max_relations == 0) {
    throw ConfigError("schema limits must be positive");
  }
}

MathContext ContextReconstructor::limit(MathContext ctx) const {
  std::erase_if(ctx.relations, [&](const Relation& r) { return !schema_.allowed_relations.count(r.kind); });
  if (ctx.quantities.size() > schema_.max_quantities) ctx.quantities.resize(schema_.max_quantities);
  if (ctx.relations.size() > schema_.max_relations) ctx.relations.resize(schema_.max_relations);
  return ctx;
}

MathContext ContextReconstructor::extract(std::string_view t) const {
  return Extractor(t, *gazetteer_, schema_).run();
}

MathContext ContextReconstructor::reconstruct_deterministic(std::string_view t) const {
  const auto header = t.rfind(kSupplementHeader);
  if (header != std::string_view::npos) {
    const auto open = header + kSupplementHeader.size();
    const auto close = t.find('}', open);
    if (close != std::string_view::npos) {
      try {
        return normalize_context(limit(leak_filter(parse_supplement(t.substr(open, close - open)))));
      } catch (const ValidationError&) {
        // Not a supplement we rendered; read the text instead.
      }
    }
  }
  return normalize_context(leak_filter(limit(extract(t))));
}

MathContext ContextReconstructor::leak_filter(const MathContext& in) const {
  const auto strict = DetectionPolicy::strict();
  // Returns nullopt when the field is clean.
  auto cut = [&](const std::string& s) -> std::optional<std::string> {
    const auto spans = detect_pii_bytes(s, *gazetteer_, strict);
    if (spans.empty()) return std::nullopt;
    std::string out;
    std::size_t pos = 0;
    for (const auto& sp : spans) {
      out.append(s, pos, sp.begin - pos);
      out += ' ';
      pos = sp.end;
    }
    out.append(s, pos, std::string::npos);
    return text::collapse_whitespace(out);
  };

  MathContext ctx = in;
  // Cutting can expose a new hit ("Mr Alice Chen" -> "Mr"), so repeat.
  for (int round = 0; round < 4; ++round) {
    bool changed = false;
    MathContext next;
    for (const auto& v : ctx.variables) {
      if (auto c = cut(v)) {
        changed = true;
        auto t = trim_edge_words(*c);
        if (!t.empty() && (text::is_ascii_alpha(t[0]) || t[0] == '_')) next.variables.push_back(t);
      } else {
        next.variables.push_back(v);
      }
    }
    for (auto q : ctx.quantities) {
      if (q.label) {
        if (auto c = cut(*q.label)) {
          changed = true;
          auto t = trim_edge_words(*c);
          q.label = t.empty() ? std::nullopt : std::optional(t);
        }
      }
      next.quantities.push_back(std::move(q));
    }
    for (auto r : ctx.relations) {
      if (auto c = cut(r.expression)) {
        changed = true;
        std::string expr;
        try {
          expr = normalize_expression(*c);
        } catch (const ValidationError&) {
          continue;
        }
        if (expr.empty() || expr.find_first_of("+-*/=<>") == std::string::npos || !well_formed(expr)) continue;
        r.expression = expr;
      }
      next.relations.push_back(std::move(r));
    }
    next.target = ctx.target;
    if (ctx.target) {
      if (auto c = cut(*ctx.target)) {
        changed = true;
        auto t = trim_edge_words(*c);
        next.target = t.empty() ? std::nullopt : std::optional(t);
      }
    }
    ctx = std::move(next);
    if (!changed) break;
  }
  return ctx;
}

ReconstructionResult ContextReconstructor::reconstruct_llm(std::string_view input, LlmClient& client,
                                                           const PromptTemplate& prompt,
                                                           std::optional<std::string_view> fallback_text,
                                                           const std::string& request_id) const {
  ReconstructionResult result;
  auto fall_back = [&](const std::string& code) {
    result.context = reconstruct_deterministic(fallback_text.value_or(input));
    result.degraded = true;
    result.failure = code;
    return result;
  };

  const std::string base = prompt.render(schema_, input);
  std::string current = base;
  std::string last_error;
  for (int round = 0; round < 2; ++round) {
    std::string response;
    try {
      ++result.attempts;
      response = client.complete(CompletionRequest{current, 1024, 0.0, "", request_id});
    } catch (const BackendError& e) {
      return fall_back(e.code());
    }
    try {
      result.context = normalize_context(limit(leak_filter(validate_schema(response, schema_))));
      return result;
    } catch (const SchemaError& e) {
      last_error = e.code();
      current = base + "\n### repair\nYour previous reply was rejected (" + e.code() +
                "). Reply again with exactly one JSON object that follows the schema.\n";
    }
  }
  return fall_back(last_error);
}

}  // namespace srpg
