#include "srpg/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>
#include <fstream>
#include <sstream>

#include "srpg/error.hpp"
#include "srpg/numeric.hpp"
#include "srpg/reconstructor.hpp"
#include "srpg/text.hpp"

namespace srpg {

std::uint64_t DeterministicRng::below(std::uint64_t n) {
  if (n == 0) throw ValidationError("DeterministicRng::below(0)");
  // reject the tail so every residue is equally likely
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::int64_t DeterministicRng::between(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ValidationError("DeterministicRng::between: empty range");
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

Json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot read ") + what + ": " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string(what) + " " + path + " is not valid JSON: " + e.what());
  }
}

bool slot_char(char c) { return text::is_ascii_alnum(c) || c == '_'; }

std::string format_rational(const Rational& r) {
  if (auto d = r.to_decimal()) return *d;
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

using Slots = std::map<std::string, std::string, std::less<>>;

Json fill_json(const Json& j, const Slots& slots) {
  if (j.is_string()) return fill_slots(j.get<std::string>(), slots);
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& x : j) out.push_back(fill_json(x, slots));
    return out;
  }
  if (j.is_object()) {
    Json out = Json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = fill_json(it.value(), slots);
    return out;
  }
  return j;
}

struct Instance {
  std::string text;
  MathContext gold;
  std::string answer;
};

Instance instantiate(const ProblemTemplate& t, Slots slots) {
  std::map<std::string, Rational, std::less<>> vals;
  for (const auto& [k, v] : slots) {
    auto r = Rational::parse(v);
    if (!r) throw ConfigError("template " + t.id + ": parameter " + k + " is not numeric: " + v);
    vals[k] = *r;
  }
  for (const auto& [name, expr] : t.derived) {
    Rational r = evaluate_expression(expr, vals);
    auto d = r.to_decimal();
    if (!d) throw ConfigError("template " + t.id + ": derived " + name + " is not a finite decimal");
    vals[name] = r;
    slots[name] = *d;
  }
  Instance out;
  out.text = fill_slots(t.text, slots);
  out.gold = normalize_context(fill_json(t.gold, slots).get<MathContext>());
  Rational ans = evaluate_expression(t.answer, vals);
  auto d = ans.to_decimal();
  if (!d) throw ConfigError("template " + t.id + ": answer is not a finite decimal");
  out.answer = *d;
  return out;
}

ProblemTemplate parse_template(const Json& j, std::size_t index) {
  ProblemTemplate t;
  std::string name = "#" + std::to_string(index);
  auto fail = [&](const std::string& msg) -> ConfigError {
    return ConfigError("template " + name + ": " + msg);
  };
  if (!j.is_object()) throw fail("not an object");
  if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
    throw fail("missing id");
  t.id = j["id"].get<std::string>();
  name = t.id;
  for (const char* key : {"text", "answer", "category"}) {
    if (!j.contains(key) || !j[key].is_string()) throw fail(std::string("missing string field ") + key);
  }
  t.text = j["text"].get<std::string>();
  t.answer = j["answer"].get<std::string>();
  t.category = j["category"].get<std::string>();
  if (!j.contains("params") || !j["params"].is_object()) throw fail("params must be an object");
  for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
    const Json& p = it.value();
    ParamSpec spec;
    if (p.is_object() && p.contains("values")) {
      if (!p["values"].is_array() || p["values"].empty()) throw fail("param " + it.key() + ": empty values");
      for (const auto& v : p["values"]) {
        if (!v.is_string() || !normalize_decimal(v.get<std::string>()))
          throw fail("param " + it.key() + ": values must be decimal strings");
        spec.values.push_back(*normalize_decimal(v.get<std::string>()));
      }
    } else if (p.is_object() && p.contains("min") && p.contains("max") && p["min"].is_number_integer() &&
               p["max"].is_number_integer()) {
      spec.min = p["min"].get<std::int64_t>();
      spec.max = p["max"].get<std::int64_t>();
      if (spec.min > spec.max) throw fail("param " + it.key() + ": min > max");
    } else {
      throw fail("param " + it.key() + ": expected {min,max} or {values}");
    }
    t.params.emplace_back(it.key(), std::move(spec));
  }
  if (j.contains("derived")) {
    if (!j["derived"].is_array()) throw fail("derived must be an array");
    for (const auto& d : j["derived"]) {
      if (!d.is_object() || !d.contains("name") || !d.contains("expr") || !d["name"].is_string() ||
          !d["expr"].is_string())
        throw fail("derived entries need name and expr");
      t.derived.emplace_back(d["name"].get<std::string>(), d["expr"].get<std::string>());
    }
  }
  if (!j.contains("gold") || !j["gold"].is_object()) throw fail("gold must be an object");
  t.gold = j["gold"];

  // dry run on the lower bounds catches unbound slots and bad expressions
  Slots probe;
  for (const auto& [k, spec] : t.params)
    probe[k] = spec.values.empty() ? std::to_string(spec.min) : spec.values.front();
  try {
    instantiate(t, probe);
  } catch (const std::exception& e) {
    throw fail(e.what());
  }
  return t;
}

}  // namespace

std::string fill_slots(std::string_view text, const Slots& slots) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && slot_char(text[j])) ++j;
      if (j < text.size() && text[j] == '}' && j > i + 1) {
        std::string_view name = text.substr(i + 1, j - i - 1);
        auto it = slots.find(name);
        if (it == slots.end()) throw ConfigError("unbound slot {" + std::string(name) + "}");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

TemplateLibrary TemplateLibrary::from_json(const Json& j, const std::string& source) {
  if (!j.is_object() || !j.contains("templates") || !j["templates"].is_array())
    throw ConfigError(source + ": expected {\"templates\": [...]}");
  TemplateLibrary lib;
  std::set<std::string> seen;
  std::size_t idx = 0;
  for (const auto& t : j["templates"]) {
    lib.templates_.push_back(parse_template(t, idx++));
    if (!seen.insert(lib.templates_.back().id).second)
      throw ConfigError("template " + lib.templates_.back().id + ": duplicate id");
  }
  if (lib.templates_.empty()) throw ConfigError(source + ": no templates");
  return lib;
}

TemplateLibrary TemplateLibrary::load(const std::string& path) {
  return from_json(read_json_file(path, "template file"), path);
}

const ProblemTemplate* TemplateLibrary::find(std::string_view id) const {
  for (const auto& t : templates_)
    if (t.id == id) return &t;
  return nullptr;
}

std::vector<DialogueItem> generate_synthetic(std::uint64_t seed, std::size_t count,
                                             const TemplateLibrary& templates) {
  if (count == 0) throw ValidationError("count must be at least 1");
  const auto& all = templates.templates();
  std::vector<DialogueItem> out;
  out.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    DeterministicRng rng(mix_seed(seed, idx));
    const ProblemTemplate& t = all[rng.below(all.size())];
    Slots slots;
    for (const auto& [k, spec] : t.params)
      slots[k] = spec.values.empty() ? std::to_string(rng.between(spec.min, spec.max)) : rng.pick(spec.values);
    Instance inst = instantiate(t, slots);
    char id[64];
    std::snprintf(id, sizeof id, "syn-%llu-%05zu", static_cast<unsigned long long>(seed), idx);
    out.push_back({id, inst.text, inst.gold, inst.answer, t.id});
  }
  return out;
}

// ---- solver ------------------------------------------------------------

namespace {

struct QtyPattern {
  std::optional<std::string> slot;
  std::string literal;
  std::optional<std::string> unit;
  std::optional<std::string> label;
};

std::optional<std::string> whole_slot(std::string_view v) {
  if (v.size() < 3 || v.front() != '{' || v.back() != '}') return std::nullopt;
  std::string_view name = v.substr(1, v.size() - 2);
  if (!std::all_of(name.begin(), name.end(), slot_char)) return std::nullopt;
  return std::string(name);
}

struct Solver {
  const ProblemTemplate& t;
  const MathContext& ctx;
  std::vector<QtyPattern> qty;
  std::vector<std::string> relations;
  std::set<std::string, std::less<>> have_relations;
  std::vector<bool> used;
  Slots bound;
  std::set<std::string> answers;
  bool broken = false;

  void finish() {
    std::map<std::string, Rational, std::less<>> vals;
    for (const auto& [k, v] : bound) {
      auto r = Rational::parse(v);
      if (!r) return;
      vals[k] = *r;
    }
    try {
      for (const auto& rel : relations)
        if (!have_relations.count(normalize_expression(fill_slots(rel, bound)))) return;
      answers.insert(format_rational(evaluate_expression(t.answer, vals)));
    } catch (const std::exception&) {
      // unbound slot or division by zero: this binding does not solve
    }
  }

  void search(std::size_t i) {
    if (answers.size() > 1) return;
    if (i == qty.size()) {
      finish();
      return;
    }
    const QtyPattern& p = qty[i];
    for (std::size_t k = 0; k < ctx.quantities.size(); ++k) {
      if (used[k]) continue;
      const Quantity& q = ctx.quantities[k];
      if (q.unit != p.unit || q.label != p.label) continue;
      if (!p.slot) {
        if (compare_decimal(q.value, p.literal) != 0) continue;
        used[k] = true;
        search(i + 1);
        used[k] = false;
        continue;
      }
      auto it = bound.find(*p.slot);
      if (it != bound.end()) {
        if (compare_decimal(it->second, q.value) != 0) continue;
        used[k] = true;
        search(i + 1);
        used[k] = false;
        continue;
      }
      bound[*p.slot] = q.value;
      used[k] = true;
      search(i + 1);
      used[k] = false;
      bound.erase(*p.slot);
    }
  }
};

}  // namespace

std::optional<std::string> solve_template(const ProblemTemplate& tmpl, const MathContext& extracted) {
  Solver s{tmpl, extracted, {}, {}, {}, {}, {}, {}};
  const Json& gq = tmpl.gold.value("quantities", Json::array());
  for (const auto& q : gq) {
    QtyPattern p;
    std::string v = q.value("value", "");
    p.slot = whole_slot(v);
    if (!p.slot) {
      auto n = normalize_decimal(v);
      if (!n) return std::nullopt;
      p.literal = *n;
    }
    if (q.contains("unit") && q["unit"].is_string()) p.unit = q["unit"].get<std::string>();
    if (q.contains("label") && q["label"].is_string()) p.label = normalize_label(q["label"].get<std::string>());
    s.qty.push_back(std::move(p));
  }
  for (const auto& r : tmpl.gold.value("relations", Json::array())) s.relations.push_back(r.value("expression", ""));
  for (const auto& r : extracted.relations) s.have_relations.insert(normalize_expression(r.expression));
  s.used.assign(extracted.quantities.size(), false);
  s.search(0);
  if (s.answers.size() != 1) return std::nullopt;
  return *s.answers.begin();
}

// ---- ingestion -----------------------------------------------------------

IngestResult ingest_mathdial(const std::string& path, const ContextReconstructor& reconstructor) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dialogue file: " + path);
  IngestResult res;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0, nonblank = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++nonblank;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      res.skipped.emplace_back(lineno, "not valid JSON");
      continue;
    }
    std::string missing;
    for (const char* key : {"id", "student_turn_text", "problem_text"}) {
      if (!j.is_object() || !j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
        missing = key;
        break;
      }
    }
    if (!missing.empty()) {
      res.skipped.emplace_back(lineno, "missing or empty field " + missing);
      continue;
    }
    std::string id = j["id"].get<std::string>();
    if (!ids.insert(id).second) {
      res.skipped.emplace_back(lineno, "duplicate id " + id);
      continue;
    }
    DialogueItem item;
    item.id = id;
    item.turn_text = j["student_turn_text"].get<std::string>();
    item.gold_context = reconstructor.reconstruct_deterministic(j["problem_text"].get<std::string>());
    res.items.push_back(std::move(item));
  }
  if (nonblank == 0) res.warnings.push_back(path + ": empty file");
  if (!res.skipped.empty())
    res.warnings.push_back(path + ": skipped " + std::to_string(res.skipped.size()) + " of " +
                           std::to_string(nonblank) + " lines");
  return res;
}

// ---- profiles and injection --------------------------------------------

namespace {

PiiProfile::Field parse_field(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("canonical") || !j["canonical"].is_string() || !j.contains("aliases") ||
      !j["aliases"].is_array())
    throw ConfigError(where + ": expected {canonical, aliases}");
  PiiProfile::Field f;
  f.canonical = j["canonical"].get<std::string>();
  for (const auto& a : j["aliases"]) {
    if (!a.is_string() || a.get<std::string>().empty()) throw ConfigError(where + ": empty alias");
    f.aliases.push_back(a.get<std::string>());
  }
  if (f.canonical.empty() || f.aliases.empty()) throw ConfigError(where + ": empty field");
  return f;
}

}  // namespace

std::vector<PiiProfile> load_profiles(const std::string& path) {
  Json j = read_json_file(path, "profile file");
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of profiles");
  std::vector<PiiProfile> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string where = path + " profile " + std::to_string(i);
    if (!j[i].is_object()) throw ConfigError(where + ": not an object");
    PiiProfile p;
    p.person_name = parse_field(j[i].value("person_name", Json()), where + " person_name");
    p.location = parse_field(j[i].value("location", Json()), where + " location");
    p.phone = parse_field(j[i].value("phone", Json()), where + " phone");
    p.school = parse_field(j[i].value("school", Json()), where + " school");
    out.push_back(std::move(p));
  }
  return out;
}

std::string_view to_string(InjectionStyle style) {
  switch (style) {
    case InjectionStyle::Free: return "free";
    case InjectionStyle::Structured: return "structured";
    case InjectionStyle::Entangled: return "entangled";
  }
  return "free";
}

std::optional<InjectionStyle> parse_injection_style(std::string_view name) {
  if (name == "free") return InjectionStyle::Free;
  if (name == "structured") return InjectionStyle::Structured;
  if (name == "entangled") return InjectionStyle::Entangled;
  return std::nullopt;
}

InjectionBank InjectionBank::load(const std::string& path) {
  Json j = read_json_file(path, "injection bank");
  InjectionBank b;
  try {
    for (const auto& s : j.at("pii_sentences"))
      b.pii_sentences.push_back({s.at("id").get<std::string>(), s.at("text").get<std::string>(),
                                 s.value("entangled", false)});
    for (const auto& n : j.at("noise")) b.noise.push_back(n.get<std::string>());
    for (const auto& f : j.at("structured_fields"))
      b.structured_fields.push_back({f.at("key").get<std::string>(), f.at("slot").get<std::string>()});
    b.structured_problem_key = j.value("structured_problem_key", std::string("problem"));
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  auto entangled = std::count_if(b.pii_sentences.begin(), b.pii_sentences.end(),
                                 [](const Sentence& s) { return s.entangled; });
  if (entangled == 0 || entangled == static_cast<long>(b.pii_sentences.size()))
    throw ConfigError(path + ": need both entangled and plain PII sentences");
  if (b.structured_fields.empty()) throw ConfigError(path + ": no structured fields");
  return b;
}

namespace {

struct ByteRecord {
  PiiRecord rec;
  std::size_t begin;
  std::size_t end;
};

class Filler {
 public:
  Filler(const PiiProfile& p, const Gazetteer& g, DeterministicRng& rng) : p_(p), g_(g), rng_(rng) {}

  // Appends `tmpl` with slots filled to `out`, recording PII in byte offsets.
  void append(std::string& out, std::string_view tmpl, std::vector<ByteRecord>& recs) {
    std::size_t i = 0;
    while (i < tmpl.size()) {
      if (tmpl[i] == '{') {
        std::size_t j = tmpl.find('}', i);
        if (j == std::string_view::npos) throw ConfigError("unterminated slot in injection sentence");
        std::string slot(tmpl.substr(i + 1, j - i - 1));
        fill(out, slot, recs);
        i = j + 1;
        continue;
      }
      out += tmpl[i++];
    }
  }

  void fill(std::string& out, const std::string& slot, std::vector<ByteRecord>& recs) {
    if (slot == "room") {
      out += std::to_string(rng_.between(1, 60));
      return;
    }
    PiiKind kind;
    const std::string* canonical;
    const std::vector<std::string>* aliases;
    std::string surface;
    if (slot == "name" || slot == "first_name") {
      kind = PiiKind::PersonName;
      canonical = &p_.person_name.canonical;
      aliases = &p_.person_name.aliases;
      surface = slot == "first_name" && aliases->size() > 1 ? (*aliases)[1] : aliases->front();
    } else if (slot == "location") {
      kind = PiiKind::Location;
      canonical = &p_.location.canonical;
      aliases = &p_.location.aliases;
      surface = rng_.pick(*aliases);
    } else if (slot == "location2") {
      kind = PiiKind::Location;
      std::vector<const GazetteerEntry*> others;
      for (const auto& e : g_.entries(PiiKind::Location))
        if (e.canonical != p_.location.canonical) others.push_back(&e);
      if (others.empty()) throw ConfigError("gazetteer has no second location");
      const GazetteerEntry* e = rng_.pick(others);
      canonical = &e->canonical;
      aliases = &e->aliases;
      surface = aliases->front();
    } else if (slot == "phone") {
      kind = PiiKind::PhoneNumber;
      canonical = &p_.phone.canonical;
      aliases = &p_.phone.aliases;
      surface = rng_.pick(*aliases);
    } else if (slot == "school") {
      kind = PiiKind::SchoolName;
      canonical = &p_.school.canonical;
      aliases = &p_.school.aliases;
      surface = aliases->front();
    } else {
      throw ConfigError("unknown injection slot {" + slot + "}");
    }
    ByteRecord br{{kind, *canonical, *aliases, 0, 0, surface}, out.size(), out.size() + surface.size()};
    out += surface;
    recs.push_back(std::move(br));
  }

 private:
  const PiiProfile& p_;
  const Gazetteer& g_;
  DeterministicRng& rng_;
};

}  // namespace

InjectedItem inject_pii(const DialogueItem& item, const PiiProfile& profile, std::uint64_t seed,
                        const InjectionBank& bank, const Gazetteer& gazetteer,
                        std::optional<InjectionStyle> style) {
  if (item.turn_text.empty()) throw ValidationError("inject_pii: empty turn text for " + item.id);
  DeterministicRng rng(mix_seed(seed, fnv1a(item.id)));
  InjectionStyle st;
  if (style) {
    st = *style;
  } else {
    auto r = rng.below(10);
    st = r < 6 ? InjectionStyle::Free : r < 8 ? InjectionStyle::Entangled : InjectionStyle::Structured;
  }

  Filler filler(profile, gazetteer, rng);
  std::vector<ByteRecord> recs;
  std::vector<std::pair<std::size_t, std::size_t>> noise_bytes;
  std::string out;

  if (st == InjectionStyle::Structured) {
    auto fields = bank.structured_fields;
    rng.shuffle(fields);
    fields.resize(1 + rng.below(std::min<std::size_t>(3, fields.size())));
    for (const auto& f : fields) {
      out += f.key + ": ";
      filler.fill(out, f.slot, recs);
      out += '\n';
    }
    out += bank.structured_problem_key + ": " + item.turn_text;
  } else {
    std::vector<const InjectionBank::Sentence*> plain, tangled;
    for (const auto& s : bank.pii_sentences) (s.entangled ? tangled : plain).push_back(&s);
    std::size_t n_pii = 1 + rng.below(3);
    std::vector<const InjectionBank::Sentence*> chosen;
    if (st == InjectionStyle::Entangled) chosen.push_back(rng.pick(tangled));
    while (chosen.size() < n_pii) chosen.push_back(rng.pick(plain));
    auto noise = bank.noise;
    rng.shuffle(noise);
    noise.resize(std::min<std::size_t>(noise.size(), rng.below(3)));

    // units go into the gaps around the problem's sentences
    auto sentences = text::split_sentences(item.turn_text);
    if (sentences.empty()) sentences.push_back({0, item.turn_text.size()});
    std::vector<std::vector<std::pair<bool, std::size_t>>> gaps(sentences.size() + 1);
    for (std::size_t k = 0; k < chosen.size(); ++k) gaps[rng.below(gaps.size())].emplace_back(true, k);
    for (std::size_t k = 0; k < noise.size(); ++k) gaps[rng.below(gaps.size())].emplace_back(false, k);

    auto sep = [&] {
      if (!out.empty()) out += ' ';
    };
    for (std::size_t g = 0; g < gaps.size(); ++g) {
      for (const auto& [is_pii, k] : gaps[g]) {
        sep();
        if (is_pii) {
          filler.append(out, chosen[k]->text, recs);
        } else {
          noise_bytes.emplace_back(out.size(), out.size() + noise[k].size());
          out += noise[k];
        }
      }
      if (g < sentences.size()) {
        sep();
        // keep the original text between sentences so math content is verbatim
        std::size_t b = g == 0 ? 0 : sentences[g].begin;
        std::size_t e = g + 1 == sentences.size() ? item.turn_text.size() : sentences[g].end;
        out.append(item.turn_text, b, e - b);
      }
    }
  }

  text::OffsetIndex idx(out);
  InjectedItem res;
  res.base = item;
  res.injected_text = out;
  res.style = st;
  for (auto& br : recs) {
    br.rec.start = idx.to_scalar(br.begin);
    br.rec.end = idx.to_scalar(br.end);
    res.pii.push_back(std::move(br.rec));
  }
  for (const auto& [b, e] : noise_bytes) res.noise_spans.emplace_back(idx.to_scalar(b), idx.to_scalar(e));
  return res;
}

std::vector<InjectedItem> inject_corpus(const std::vector<DialogueItem>& items, const std::vector<PiiProfile>& profiles,
                                        std::uint64_t seed, const InjectionBank& bank, const Gazetteer& gazetteer,
                                        std::optional<InjectionStyle> style) {
  if (profiles.empty()) throw ConfigError("no PII profiles");
  std::vector<InjectedItem> out;
  out.reserve(items.size());
  for (const auto& it : items) {
    DeterministicRng pick(mix_seed(seed ^ 0x70726f66ULL, fnv1a(it.id)));
    out.push_back(inject_pii(it, profiles[pick.below(profiles.size())], seed, bank, gazetteer, style));
  }
  return out;
}

// ---- JSON and JSONL ----------------------------------------------------

void to_json(Json& j, const DialogueItem& d) {
  j = Json{{"id", d.id},
           {"turn_text", d.turn_text},
           {"gold_context", d.gold_context},
           {"gold_answer", d.gold_answer ? Json(*d.gold_answer) : Json(nullptr)},
           {"template_id", d.template_id ? Json(*d.template_id) : Json(nullptr)}};
}

void from_json(const Json& j, DialogueItem& d) {
  if (!j.is_object()) throw ValidationError("dialogue item must be an object");
  d.id = j.at("id").get<std::string>();
  if (d.id.empty()) throw ValidationError("empty id");
  d.turn_text = j.at("turn_text").get<std::string>();
  d.gold_context = j.at("gold_context").get<MathContext>();
  d.gold_answer.reset();
  d.template_id.reset();
  if (j.contains("gold_answer") && !j["gold_answer"].is_null()) d.gold_answer = j["gold_answer"].get<std::string>();
  if (j.contains("template_id") && !j["template_id"].is_null()) d.template_id = j["template_id"].get<std::string>();
}

void to_json(Json& j, const InjectedItem& d) {
  Json spans = Json::array();
  for (const auto& [b, e] : d.noise_spans) spans.push_back(Json::array({b, e}));
  j = Json{{"base", d.base},
           {"injected_text", d.injected_text},
           {"pii", d.pii},
           {"noise_spans", spans},
           {"style", std::string(to_string(d.style))}};
}

void from_json(const Json& j, InjectedItem& d) {
  if (!j.is_object()) throw ValidationError("corpus item must be an object");
  d.base = j.at("base").get<DialogueItem>();
  d.injected_text = j.at("injected_text").get<std::string>();
  d.pii = j.at("pii").get<std::vector<PiiRecord>>();
  d.noise_spans.clear();
  for (const auto& s : j.at("noise_spans")) {
    if (!s.is_array() || s.size() != 2) throw ValidationError("noise span must be [start, end]");
    d.noise_spans.emplace_back(s[0].get<std::size_t>(), s[1].get<std::size_t>());
  }
  auto st = parse_injection_style(j.at("style").get<std::string>());
  if (!st) throw ValidationError("unknown style " + j.at("style").dump());
  d.style = *st;

  text::OffsetIndex idx(d.injected_text);
  const std::size_t len = idx.scalar_length();
  for (const auto& r : d.pii) {
    if (r.start > r.end || r.end > len) throw ValidationError("pii span out of range");
    std::size_t b = idx.to_byte(r.start), e = idx.to_byte(r.end);
    if (d.injected_text.compare(b, e - b, r.surface) != 0)
      throw ValidationError("pii surface does not match its span: " + r.surface);
  }
  for (const auto& [b, e] : d.noise_spans)
    if (b > e || e > len) throw ValidationError("noise span out of range");
}

namespace {

template <typename T>
std::string jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& it : items) {
    out += Json(it).dump();
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << body;
  if (!out) throw IoError("write failed: " + path);
}

template <typename T, typename IdOf>
std::vector<T> read_jsonl(const std::string& path, IdOf id_of) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read corpus file: " + path);
  std::vector<T> out;
  std::map<std::string, std::vector<std::size_t>> lines_of;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line).get<T>());
    } catch (const Error& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    lines_of[id_of(out.back())].push_back(lineno);
  }
  std::string dups;
  for (const auto& [id, lines] : lines_of) {
    if (lines.size() < 2) continue;
    if (!dups.empty()) dups += ", ";
    dups += id + " (lines";
    for (auto l : lines) dups += " " + std::to_string(l);
    dups += ")";
  }
  if (!dups.empty()) throw ValidationError(path + ": duplicate ids: " + dups);
  return out;
}

}  // namespace

void save_dialogues(const std::vector<DialogueItem>& items, const std::string& path) {
  write_text(path, jsonl(items));
}

std::vector<DialogueItem> load_dialogues(const std::string& path) {
  return read_jsonl<DialogueItem>(path, [](const DialogueItem& d) { return d.id; });
}

std::string to_jsonl(const std::vector<InjectedItem>& items) { return jsonl(items); }

void save_corpus(const std::vector<InjectedItem>& items, const std::string& path) {
  write_text(path, to_jsonl(items));
}

std::vector<InjectedItem> load_corpus(const std::string& path) {
  return read_jsonl<InjectedItem>(path, [](const InjectedItem& d) { return d.base.id; });
}

}  // namespace srpg
