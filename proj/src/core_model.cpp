#include "srpg/core_model.hpp"

#include <algorithm>
#include <fstream>

#include "srpg/error.hpp"
#include "srpg/numeric.hpp"
#include "srpg/text.hpp"

namespace srpg {
namespace {

constexpr std::string_view kKindNames[] = {"PersonName", "Location",     "PhoneNumber",
                                           "SchoolName", "ContactOther", "IdNumber"};
constexpr std::string_view kRelationNames[] = {"Equation", "Inequality", "Ratio",
                                               "OperationPhrase"};
constexpr std::string_view kMethodNames[] = {"none", "naive", "purellm", "epe", "srpg"};

bool separator_char(char c) { return c == ',' || c == '[' || c == ']' || c == '|' || c == ':'; }

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> split_list(std::string_view body) {
  std::vector<std::string> out;
  if (body.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = body.find(',', start);
    out.emplace_back(body.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

int compare_optional(const std::optional<std::string>& a, const std::optional<std::string>& b) {
  if (!a && !b) return 0;
  if (!a) return -1;
  if (!b) return 1;
  return a->compare(*b) < 0 ? -1 : (*a == *b ? 0 : 1);
}

bool quantity_less(const Quantity& a, const Quantity& b) {
  if (const int c = compare_decimal(a.value, b.value); c != 0) return c < 0;
  if (const int c = compare_optional(a.unit, b.unit); c != 0) return c < 0;
  return compare_optional(a.label, b.label) < 0;
}

std::string quantity_item(const Quantity& q) {
  std::string out = q.value;
  if (q.unit) out += " " + *q.unit;
  if (q.label) out += ":" + *q.label;
  return out;
}

// Two canonical views of `s`: punctuation removed, and punctuation replaced
// by spaces. Both lowercased, whitespace collapsed and space-padded.
std::pair<std::string, std::string> canonical_views(std::string_view s) {
  std::string dropped;
  std::string spaced;
  dropped.reserve(s.size());
  spaced.reserve(s.size());
  for (char c : s) {
    const auto uc = static_cast<unsigned char>(c);
    if (text::is_ascii_alnum(c) || uc >= 0x80) {
      const char lc = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
      dropped.push_back(lc);
      spaced.push_back(lc);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      dropped.push_back(' ');
      spaced.push_back(' ');
    } else {
      spaced.push_back(' ');
    }
  }
  return {" " + text::collapse_whitespace(dropped) + " ", " " + text::collapse_whitespace(spaced) + " "};
}

bool digit_separator(char c) {
  return c == ' ' || c == '-' || c == '.' || c == '(' || c == ')' || c == '/' || c == '+';
}

// Digit strings of runs joined by at most three separator characters, e.g.
// "(138) 0013-8000" -> "13800138000".
std::vector<std::string> digit_groups(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!text::is_ascii_digit(s[i])) {
      ++i;
      continue;
    }
    std::string digits;
    std::size_t j = i;
    for (;;) {
      while (j < s.size() && text::is_ascii_digit(s[j])) digits.push_back(s[j++]);
      std::size_t k = j;
      while (k < s.size() && k - j < 3 && digit_separator(s[k])) ++k;
      if (k > j && k < s.size() && text::is_ascii_digit(s[k])) {
        j = k;
        continue;
      }
      break;
    }
    out.push_back(std::move(digits));
    i = j;
  }
  return out;
}

std::string digits_of(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (text::is_ascii_digit(c)) out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view to_string(PiiKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<PiiKind> parse_pii_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == name) return static_cast<PiiKind>(i);
  }
  return std::nullopt;
}

int kind_priority(PiiKind kind) {
  switch (kind) {
    case PiiKind::PhoneNumber: return 0;
    case PiiKind::PersonName: return 1;
    case PiiKind::Location: return 2;
    case PiiKind::SchoolName: return 3;
    case PiiKind::ContactOther: return 4;
    case PiiKind::IdNumber: return 5;
  }
  return 6;
}

bool is_numeric_kind(PiiKind kind) {
  return kind == PiiKind::PhoneNumber || kind == PiiKind::IdNumber;
}

std::string_view to_string(RelationKind kind) { return kRelationNames[static_cast<int>(kind)]; }

std::optional<RelationKind> parse_relation_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kRelationNames); ++i) {
    if (kRelationNames[i] == name) return static_cast<RelationKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(GuardMethod method) { return kMethodNames[static_cast<int>(method)]; }

std::optional<GuardMethod> parse_guard_method(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kMethodNames); ++i) {
    if (kMethodNames[i] == name) return static_cast<GuardMethod>(i);
  }
  return std::nullopt;
}

UnitLexicon::UnitLexicon(std::set<std::string, std::less<>> units) : units_(std::move(units)) {
  for (const auto& u : units_) {
    if (u.empty()) throw ConfigError("unit lexicon: empty unit");
    for (char c : u) {
      if (separator_char(c) || c == ' ' || c == '\t' || c == '\n' || c == '{' || c == '}' ||
          std::string_view("+-*/=<>()").find(c) != std::string_view::npos) {
        throw ConfigError("unit lexicon: unit '" + u + "' contains a reserved character");
      }
    }
  }
}

UnitLexicon UnitLexicon::defaults() {
  return UnitLexicon({"km", "m", "cm", "kg", "g", "h", "min", "s", "$", "%", "dollars"});
}

UnitLexicon UnitLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open unit lexicon '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("unit lexicon '" + path + "': " + e.what());
  }
  if (!j.is_object() || !j.contains("units") || !j["units"].is_array()) {
    throw ConfigError("unit lexicon '" + path + "': expected {\"units\": [...]}");
  }
  std::set<std::string, std::less<>> units;
  for (const auto& u : j["units"]) {
    if (!u.is_string()) throw ConfigError("unit lexicon '" + path + "': units must be strings");
    units.insert(u.get<std::string>());
  }
  return UnitLexicon(std::move(units));
}

std::string canonicalize_pii(PiiKind kind, std::string_view surface) {
  if (is_numeric_kind(kind)) {
    auto digits = digits_of(surface);
    if (!digits.empty()) return digits;
  }
  std::string kept;
  kept.reserve(surface.size());
  for (char c : surface) {
    const auto uc = static_cast<unsigned char>(c);
    if (text::is_ascii_alnum(c) || uc >= 0x80) {
      kept.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      kept.push_back(' ');
    }
  }
  return text::collapse_whitespace(kept);
}

bool in_canonical_alphabet(char c) {
  if (text::is_ascii_alnum(c)) return true;
  switch (c) {
    case ' ': case '+': case '-': case '*': case '/': case '=':
    case '<': case '>': case '(': case ')': case '.': case '_':
      return true;
    default:
      return false;
  }
}

std::string normalize_label(std::string_view label) {
  std::string kept;
  for (char c : label) {
    if (text::is_ascii_alnum(c) || c == '_') {
      kept.push_back(c);
    } else {
      kept.push_back(' ');
    }
  }
  return text::collapse_whitespace(kept);
}

std::string normalize_target(std::string_view target) {
  std::string kept;
  for (char c : target) {
    if (c == '\t' || c == '\n' || c == '\r') {
      kept.push_back(' ');
    } else if (in_canonical_alphabet(c)) {
      kept.push_back(c);
    }
  }
  return text::collapse_whitespace(kept);
}

std::string normalize_expression(std::string_view expr) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < expr.size()) {
    const char c = expr[i];
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    if (expr.substr(i, 2) == "\xC3\x97") {  // ×
      tokens.emplace_back("*");
      i += 2;
      continue;
    }
    if (expr.substr(i, 2) == "\xC3\xB7") {  // ÷
      tokens.emplace_back("/");
      i += 2;
      continue;
    }
    if (text::is_ascii_alnum(c) || c == '_' || c == '.') {
      std::size_t j = i;
      while (j < expr.size() && (text::is_ascii_alnum(expr[j]) || expr[j] == '_' || expr[j] == '.')) ++j;
      std::string word(expr.substr(i, j - i));
      if (auto num = normalize_decimal(word)) word = *num;
      tokens.push_back(std::move(word));
      i = j;
      continue;
    }
    if ((c == '<' || c == '>') && i + 1 < expr.size() && expr[i + 1] == '=') {
      tokens.emplace_back(expr.substr(i, 2));
      i += 2;
      continue;
    }
    if (in_canonical_alphabet(c)) {
      tokens.emplace_back(1, c);
      ++i;
      continue;
    }
    throw ValidationError("expression '" + std::string(expr) + "' contains a character outside the canonical alphabet");
  }
  return join(tokens, " ");
}

RelationKind infer_relation_kind(std::string_view expr) {
  if (expr.find('_') != std::string_view::npos) return RelationKind::OperationPhrase;
  if (expr.find('<') != std::string_view::npos || expr.find('>') != std::string_view::npos) {
    return RelationKind::Inequality;
  }
  bool single_letter_var = false;
  for (const auto& tok : text::tokenize(expr)) {
    if (tok.kind == text::TokenKind::Word && tok.text.size() == 1) single_letter_var = true;
  }
  const bool has_eq = expr.find('=') != std::string_view::npos;
  const bool has_div = expr.find('/') != std::string_view::npos;
  if (has_eq) return (has_div && !single_letter_var) ? RelationKind::Ratio : RelationKind::Equation;
  return has_div ? RelationKind::Ratio : RelationKind::OperationPhrase;
}

MathContext normalize_context(const MathContext& ctx) {
  MathContext out;
  for (const auto& v : ctx.variables) {
    auto n = normalize_label(v);
    if (n.empty()) continue;
    if (!text::is_ascii_alpha(n[0]) && n[0] != '_') {
      throw ValidationError("variable '" + n + "' must start with a letter");
    }
    out.variables.push_back(std::move(n));
  }
  std::sort(out.variables.begin(), out.variables.end());
  out.variables.erase(std::unique(out.variables.begin(), out.variables.end()), out.variables.end());

  for (const auto& q : ctx.quantities) {
    auto value = normalize_decimal(q.value);
    if (!value) throw ValidationError("quantity value '" + q.value + "' is not a finite decimal");
    Quantity nq{*value, std::nullopt, std::nullopt};
    if (q.unit) {
      auto u = text::collapse_whitespace(*q.unit);
      for (char c : u) {
        if (separator_char(c) || c == ' ') throw ValidationError("unit '" + u + "' contains a reserved character");
      }
      if (!u.empty()) nq.unit = std::move(u);
    }
    if (q.label) {
      auto l = normalize_label(*q.label);
      if (l.find('=') != std::string::npos) throw ValidationError("label '" + l + "' contains '='");
      if (!l.empty()) nq.label = std::move(l);
    }
    out.quantities.push_back(std::move(nq));
  }
  std::sort(out.quantities.begin(), out.quantities.end(), quantity_less);

  for (const auto& r : ctx.relations) {
    auto e = normalize_expression(r.expression);
    if (e.empty()) continue;
    if (e.find_first_of("+-*/=<>()") == std::string::npos) {
      throw ValidationError("relation '" + e + "' has no operator");
    }
    out.relations.push_back(Relation{r.kind, std::move(e)});
  }
  std::sort(out.relations.begin(), out.relations.end(),
            [](const Relation& a, const Relation& b) { return a.expression < b.expression; });
  out.relations.erase(std::unique(out.relations.begin(), out.relations.end(),
                                  [](const Relation& a, const Relation& b) {
                                    return a.expression == b.expression;
                                  }),
                      out.relations.end());

  if (ctx.target) {
    auto t = normalize_target(*ctx.target);
    if (!t.empty()) out.target = std::move(t);
  }
  return out;
}

std::string canonical_serialize(const MathContext& raw) {
  const MathContext ctx = normalize_context(raw);
  std::vector<std::string> qty;
  qty.reserve(ctx.quantities.size());
  for (const auto& q : ctx.quantities) qty.push_back(quantity_item(q));
  std::vector<std::string> rel;
  rel.reserve(ctx.relations.size());
  for (const auto& r : ctx.relations) rel.push_back(r.expression);
  return "vars:[" + join(ctx.variables, ",") + "]|qty:[" + join(qty, ",") + "]|rel:[" +
         join(rel, ",") + "]|target:" + ctx.target.value_or("");
}

MathContext deserialize_context(std::string_view s) {
  auto fail = [&](const std::string& why) {
    return ValidationError("malformed canonical context (" + why + "): '" + std::string(s) + "'");
  };
  auto take_list = [&](std::string_view& rest, std::string_view key) {
    const std::string open = std::string(key) + ":[";
    if (rest.substr(0, open.size()) != open) throw fail("expected '" + open + "'");
    rest.remove_prefix(open.size());
    const auto close = rest.find(']');
    if (close == std::string_view::npos) throw fail("unterminated list");
    auto items = split_list(rest.substr(0, close));
    rest.remove_prefix(close + 1);
    if (rest.empty() || rest[0] != '|') throw fail("expected '|'");
    rest.remove_prefix(1);
    return items;
  };

  std::string_view rest = s;
  MathContext ctx;
  ctx.variables = take_list(rest, "vars");
  for (const auto& item : take_list(rest, "qty")) {
    Quantity q;
    std::string_view body = item;
    const auto colon = body.find(':');
    if (colon != std::string_view::npos) {
      q.label = std::string(body.substr(colon + 1));
      body = body.substr(0, colon);
    }
    const auto space = body.find(' ');
    if (space != std::string_view::npos) {
      q.unit = std::string(body.substr(space + 1));
      body = body.substr(0, space);
    }
    q.value = std::string(body);
    ctx.quantities.push_back(std::move(q));
  }
  for (const auto& item : take_list(rest, "rel")) {
    ctx.relations.push_back(Relation{infer_relation_kind(item), item});
  }
  const std::string_view target_key = "target:";
  if (rest.substr(0, target_key.size()) != target_key) throw fail("expected 'target:'");
  rest.remove_prefix(target_key.size());
  if (!rest.empty()) ctx.target = std::string(rest);
  return normalize_context(ctx);
}

bool contexts_equal(const MathContext& a, const MathContext& b) {
  return canonical_serialize(a) == canonical_serialize(b);
}

std::string render_supplement(const MathContext& raw) {
  const MathContext ctx = normalize_context(raw);
  std::vector<std::string> items = ctx.variables;
  for (const auto& q : ctx.quantities) {
    std::string item = q.label ? *q.label + "=" + q.value : q.value;
    if (q.unit) item += " " + *q.unit;
    items.push_back(std::move(item));
  }
  for (const auto& r : ctx.relations) items.push_back(r.expression);
  if (ctx.target) items.push_back("Target: " + *ctx.target);
  return "{" + join(items, ", ") + "}";
}

MathContext parse_supplement(std::string_view body) {
  MathContext ctx;
  if (body.empty()) return ctx;
  std::size_t start = 0;
  for (;;) {
    const auto sep = body.find(", ", start);
    const auto item = body.substr(start, sep == std::string_view::npos ? sep : sep - start);
    auto value_unit = [&](std::string_view vu, Quantity& q) {
      const auto space = vu.find(' ');
      q.value = std::string(vu.substr(0, space));
      if (space != std::string_view::npos) q.unit = std::string(vu.substr(space + 1));
      return normalize_decimal(q.value).has_value() &&
             (!q.unit || (q.unit->find(' ') == std::string::npos && !q.unit->empty()));
    };
    const auto eq = item.find('=');
    Quantity q;
    if (item.substr(0, 8) == "Target: ") {
      ctx.target = std::string(item.substr(8));
    } else if (eq != std::string_view::npos && eq > 0 && item[eq - 1] != ' ' &&
               item[eq - 1] != '<' && item[eq - 1] != '>') {
      q.label = std::string(item.substr(0, eq));
      if (!value_unit(item.substr(eq + 1), q)) {
        throw ValidationError("malformed supplement item '" + std::string(item) + "'");
      }
      ctx.quantities.push_back(std::move(q));
    } else if (value_unit(item, q) &&
               (!q.unit || q.unit->find_first_of("+-*/=<>()") == std::string::npos)) {
      ctx.quantities.push_back(std::move(q));
    } else if (item.find_first_of("+-*/=<>()") != std::string_view::npos) {
      ctx.relations.push_back(Relation{infer_relation_kind(item), std::string(item)});
    } else if (!item.empty() && (text::is_ascii_alpha(item[0]) || item[0] == '_')) {
      ctx.variables.emplace_back(item);
    } else {
      throw ValidationError("malformed supplement item '" + std::string(item) + "'");
    }
    if (sep == std::string_view::npos) break;
    start = sep + 2;
  }
  return normalize_context(ctx);
}

LeakScanner::LeakScanner(std::string_view t) {
  auto [dropped, spaced] = canonical_views(t);
  dropped_ = std::move(dropped);
  spaced_ = std::move(spaced);
  digit_groups_ = digit_groups(t);
}

bool LeakScanner::contains(PiiKind kind, std::string_view alias) const {
  if (is_numeric_kind(kind)) {
    const auto digits = digits_of(alias);
    if (digits.size() >= 7) {
      return std::any_of(digit_groups_.begin(), digit_groups_.end(), [&](const std::string& g) {
        return g.find(digits) != std::string::npos;
      });
    }
  }
  const auto [a_dropped, a_spaced] = canonical_views(alias);
  for (const auto& needle : {a_dropped, a_spaced}) {
    if (needle.size() <= 2) continue;  // alias was all punctuation
    if (dropped_.find(needle) != std::string::npos || spaced_.find(needle) != std::string::npos) {
      return true;
    }
  }
  return false;
}

std::vector<LeakHit> find_leaks(std::string_view t, const std::vector<PiiRecord>& records) {
  const LeakScanner scanner(t);
  std::vector<LeakHit> hits;
  for (const auto& r : records) {
    std::vector<std::string> candidates = r.aliases;
    if (!r.canonical.empty()) candidates.push_back(r.canonical);
    if (!r.surface.empty()) candidates.push_back(r.surface);
    for (const auto& alias : candidates) {
      if (scanner.contains(r.kind, alias)) {
        hits.push_back(LeakHit{r.kind, alias});
        break;
      }
    }
  }
  return hits;
}

// ---- JSON -----------------------------------------------------------------

void to_json(Json& j, const Quantity& q) {
  j = Json{{"value", q.value}};
  if (q.unit) j["unit"] = *q.unit;
  if (q.label) j["label"] = *q.label;
}

void from_json(const Json& j, Quantity& q) {
  const auto& v = j.at("value");
  q.value = v.is_string() ? v.get<std::string>() : v.dump();
  q.unit = j.contains("unit") && !j["unit"].is_null() ? std::optional(j["unit"].get<std::string>())
                                                      : std::nullopt;
  q.label = j.contains("label") && !j["label"].is_null()
                ? std::optional(j["label"].get<std::string>())
                : std::nullopt;
}

void to_json(Json& j, const Relation& r) {
  j = Json{{"kind", to_string(r.kind)}, {"expression", r.expression}};
}

void from_json(const Json& j, Relation& r) {
  r.expression = j.at("expression").get<std::string>();
  if (j.contains("kind")) {
    auto k = parse_relation_kind(j["kind"].get<std::string>());
    if (!k) throw ValidationError("unknown relation kind '" + j["kind"].get<std::string>() + "'");
    r.kind = *k;
  } else {
    r.kind = infer_relation_kind(r.expression);
  }
}

void to_json(Json& j, const MathContext& c) {
  j = Json{{"variables", c.variables},
           {"quantities", c.quantities},
           {"relations", c.relations},
           {"target", c.target ? Json(*c.target) : Json(nullptr)}};
}

void from_json(const Json& j, MathContext& c) {
  c.variables = j.value("variables", std::vector<std::string>{});
  c.quantities = j.value("quantities", std::vector<Quantity>{});
  c.relations = j.value("relations", std::vector<Relation>{});
  c.target = j.contains("target") && !j["target"].is_null() &&
                     !j["target"].get<std::string>().empty()
                 ? std::optional(j["target"].get<std::string>())
                 : std::nullopt;
}

void to_json(Json& j, const PiiSpan& s) {
  j = Json{{"start", s.start},
           {"end", s.end},
           {"kind", to_string(s.kind)},
           {"surface", s.surface},
           {"canonical", s.canonical}};
}

void from_json(const Json& j, PiiSpan& s) {
  s.start = j.at("start").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
  auto k = parse_pii_kind(j.at("kind").get<std::string>());
  if (!k) throw ValidationError("unknown PII kind '" + j["kind"].get<std::string>() + "'");
  s.kind = *k;
  s.surface = j.at("surface").get<std::string>();
  s.canonical = j.at("canonical").get<std::string>();
}

void to_json(Json& j, const PiiRecord& r) {
  j = Json{{"kind", to_string(r.kind)}, {"canonical", r.canonical}, {"aliases", r.aliases},
           {"start", r.start},          {"end", r.end},             {"surface", r.surface}};
}

void from_json(const Json& j, PiiRecord& r) {
  auto k = parse_pii_kind(j.at("kind").get<std::string>());
  if (!k) throw ValidationError("unknown PII kind '" + j["kind"].get<std::string>() + "'");
  r.kind = *k;
  r.canonical = j.at("canonical").get<std::string>();
  r.aliases = j.at("aliases").get<std::vector<std::string>>();
  r.start = j.at("start").get<std::size_t>();
  r.end = j.at("end").get<std::size_t>();
  r.surface = j.at("surface").get<std::string>();
}

void to_json(Json& j, const AuditRecord& a) {
  j = Json{{"start", a.start},
           {"end", a.end},
           {"placeholder", a.placeholder},
           {"kind", a.kind},
           {"stream", a.stream}};
}

void from_json(const Json& j, AuditRecord& a) {
  a.start = j.at("start").get<std::size_t>();
  a.end = j.at("end").get<std::size_t>();
  a.placeholder = j.at("placeholder").get<std::string>();
  a.kind = j.at("kind").get<std::string>();
  a.stream = j.at("stream").get<std::string>();
}

void to_json(Json& j, const GuardOutput& g) {
  j = Json{{"id", g.id},
           {"method", to_string(g.method)},
           {"backend", g.backend},
           {"masked_text", g.masked_text},
           {"context", g.context ? Json(*g.context) : Json(nullptr)},
           {"fused_text", g.fused_text},
           {"audit", g.audit},
           {"degraded", g.degraded},
           {"backend_error", g.backend_error ? Json(*g.backend_error) : Json(nullptr)}};
}

void from_json(const Json& j, GuardOutput& g) {
  g.id = j.value("id", std::string{});
  auto m = parse_guard_method(j.at("method").get<std::string>());
  if (!m) throw ValidationError("unknown guard method '" + j["method"].get<std::string>() + "'");
  g.method = *m;
  g.backend = j.value("backend", std::string{});
  g.masked_text = j.value("masked_text", std::string{});
  g.context = j.contains("context") && !j["context"].is_null()
                  ? std::optional(j["context"].get<MathContext>())
                  : std::nullopt;
  g.fused_text = j.at("fused_text").get<std::string>();
  g.audit = j.value("audit", std::vector<AuditRecord>{});
  g.degraded = j.value("degraded", false);
  g.backend_error = j.contains("backend_error") && !j["backend_error"].is_null()
                        ? std::optional(j["backend_error"].get<std::string>())
                        : std::nullopt;
}

}  // namespace srpg
