#include "srpg/guard_pipeline.hpp"

#include <algorithm>
#include <future>

#include "srpg/error.hpp"
#include "srpg/text.hpp"

namespace srpg {

std::string_view to_string(ReconstructFrom from) { return from == ReconstructFrom::Raw ? "raw" : "safe"; }

std::optional<ReconstructFrom> parse_reconstruct_from(std::string_view name) {
  if (name == "raw") return ReconstructFrom::Raw;
  if (name == "safe") return ReconstructFrom::Safe;
  return std::nullopt;
}

std::string fuse(std::string_view masked, const MathContext& ctx) {
  std::string out(masked);
  out += "\nContext Supplement: ";
  out += render_supplement(ctx);
  return out;
}

std::string fuse(const MaskedText& masked, const MathContext& ctx) { return fuse(masked.text, ctx); }

std::string summary_prefix(const MathContext& ctx) {
  static const std::set<std::string, std::less<>> figures{
      "triangle", "circle", "rectangle", "square", "polygon", "quadrilateral", "parallelogram", "trapezoid"};
  auto first_word = [](std::string_view s) {
    auto sp = s.find(' ');
    return text::ascii_lower(s.substr(0, sp));
  };
  std::string category = "word";
  for (const auto& r : ctx.relations)
    if (r.kind == RelationKind::Equation || r.kind == RelationKind::Inequality) category = "algebra";
  bool geometry = false;
  for (const auto& v : ctx.variables) geometry |= figures.count(first_word(v)) > 0;
  for (const auto& q : ctx.quantities)
    if (q.label) {
      auto w = first_word(*q.label);
      geometry |= w == "side" || w == "angle" || w == "radius";
    }
  if (geometry) category = "geometry";
  return "User " + std::string(kMask) + " asks a" + (category == "algebra" ? "n " : " ") + category + " problem.";
}

namespace {

std::vector<AuditRecord> audit_of(const MaskedText& m, std::string_view stream) {
  std::vector<AuditRecord> out;
  for (const auto& r : m.replacements)
    out.push_back({r.masked_start, r.masked_end, r.placeholder,
                   r.kind ? std::string(to_string(*r.kind)) : std::string("Ambiguous"), std::string(stream)});
  return out;
}

}  // namespace

GuardOutput srpg_guard(std::string_view text, const GuardComponents& c, const GuardConfig& config,
                       const std::string& id) {
  if (!c.gazetteer || !c.reconstructor) throw ConfigError("srpg guard needs a gazetteer and a reconstructor");
  auto sanitize = [&] { return strict_mask(text, *c.gazetteer, config.policy, c.units); };
  auto reconstruct = [&](std::string_view input) {
    ReconstructionResult r;
    if (!c.client) {
      r.context = c.reconstructor->reconstruct_deterministic(input);
    } else {
      r = c.reconstructor->reconstruct_llm(input, *c.client, c.reconstruct_prompt, input, id);
    }
    return r;
  };

  MaskedText masked;
  ReconstructionResult rec;
  if (config.reconstruct_from == ReconstructFrom::Safe) {
    // the model only ever sees the sanitized text, so the streams are serial
    masked = sanitize();
    rec = reconstruct(masked.text);
  } else if (config.parallel_streams) {
    auto pending = std::async(std::launch::async, reconstruct, text);
    masked = sanitize();
    rec = pending.get();
  } else {
    masked = sanitize();
    rec = reconstruct(text);
  }

  GuardOutput out;
  out.id = id;
  out.method = GuardMethod::SRPG;
  out.backend = c.backend;
  out.masked_text = masked.text;
  out.context = rec.context;
  out.fused_text = config.summarize_prefix ? fuse(summary_prefix(rec.context), rec.context) : fuse(masked, rec.context);
  out.audit = audit_of(masked, "sanitization");
  out.degraded = rec.degraded;
  out.backend_error = rec.failure;

  auto raw_hits = records_from_spans(detect_pii(text, *c.gazetteer, config.policy));
  auto leaks = find_leaks(out.fused_text, raw_hits);
  if (!leaks.empty())
    throw GuardIntegrityError("fused output still contains " + std::to_string(leaks.size()) +
                              " detected identifier(s)" + (id.empty() ? "" : " in " + id));
  return out;
}

GuardOutput baseline_none(std::string_view text, const std::string& id) {
  GuardOutput out;
  out.id = id;
  out.method = GuardMethod::None;
  out.backend = "none";
  out.masked_text = std::string(text);
  out.fused_text = std::string(text);
  return out;
}

GuardOutput baseline_naive(std::string_view text, const std::string& id) {
  std::string masked;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // bytes in `masked`
  std::size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    bool word_start = i == 0 || !text::is_ascii_alpha(text[i - 1]);
    std::size_t j = i;
    if (text::is_ascii_digit(ch)) {
      while (j < text.size() && text::is_ascii_digit(text[j])) ++j;
    } else if (ch >= 'A' && ch <= 'Z' && word_start) {
      while (j < text.size() && text::is_ascii_alpha(text[j])) ++j;
    }
    if (j > i) {
      spans.emplace_back(masked.size(), masked.size() + kMask.size());
      masked += kMask;
      i = j;
    } else {
      masked += ch;
      ++i;
    }
  }
  GuardOutput out = baseline_none(masked, id);
  out.method = GuardMethod::Naive;
  out.backend = "none";
  text::OffsetIndex idx(masked);
  for (const auto& [b, e] : spans)
    out.audit.push_back({idx.to_scalar(b), idx.to_scalar(e), std::string(kMask), "Ambiguous", "naive"});
  return out;
}

GuardOutput baseline_pure_llm(std::string_view text, LlmClient& client, const PromptTemplate& prompt,
                              const std::string& id) {
  CompletionRequest req;
  req.prompt = prompt.render(ContextSchema{}, text);
  req.request_id = id;
  std::string reply;
  try {
    reply = client.complete(req);
  } catch (const BackendError& e) {
    throw GuardError("removal backend failed: " + e.code(), "backend_" + e.code());
  }
  static constexpr std::string_view open = "<<SAFE>>", close = "<</SAFE>>";
  auto b = reply.find(open);
  auto e = reply.rfind(close);
  if (b == std::string::npos || e == std::string::npos || e < b + open.size())
    throw GuardError("removal reply has no <<SAFE>> block", "backend_malformed_response");
  std::string safe = reply.substr(b + open.size(), e - b - open.size());
  // markers sit on their own lines
  if (!safe.empty() && safe.front() == '\n') safe.erase(0, 1);
  if (!safe.empty() && safe.back() == '\n') safe.pop_back();
  GuardOutput out = baseline_none(safe, id);
  out.method = GuardMethod::PureLLM;
  out.backend = client.name();
  return out;
}

std::vector<std::string> allowed_fields(std::string_view role) {
  std::string lower = text::ascii_lower(role);
  auto at = lower.find("fields:");
  if (at == std::string::npos) return {};
  std::vector<std::string> keys;
  std::string cur;
  for (std::size_t i = at + 7; i <= lower.size(); ++i) {
    char ch = i < lower.size() ? lower[i] : '.';
    if (text::is_ascii_alpha(ch) || ch == '_') {
      cur += ch;
      continue;
    }
    if (!cur.empty() && cur != "and") keys.push_back(cur);
    cur.clear();
    if (ch == '.' || ch == '\n') break;
  }
  return keys;
}

namespace {

std::optional<std::string> field_key(std::string_view line) {
  std::size_t i = 0;
  if (line.empty() || line[0] < 'a' || line[0] > 'z') return std::nullopt;
  while (i < line.size() && i < 32 && ((line[i] >= 'a' && line[i] <= 'z') || line[i] == '_')) ++i;
  if (i + 1 < line.size() && line[i] == ':' && line[i + 1] == ' ') return std::string(line.substr(0, i));
  return std::nullopt;
}

}  // namespace

GuardOutput baseline_epe(std::string_view text, std::string_view role_description, const std::string& id) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (true) {
    auto nl = text.find('\n', pos);
    lines.push_back(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  bool structured = false;
  for (auto l : lines) structured |= field_key(l).has_value();

  std::string out_text;
  if (!structured) {
    out_text = std::string(text);
  } else {
    auto allowed = allowed_fields(role_description);
    bool keep = true;  // lines before the first marker are kept
    bool first = true;
    for (auto l : lines) {
      if (auto key = field_key(l)) keep = std::find(allowed.begin(), allowed.end(), *key) != allowed.end();
      if (!keep) continue;
      if (!first) out_text += '\n';
      out_text += l;
      first = false;
    }
  }
  GuardOutput out = baseline_none(out_text, id);
  out.method = GuardMethod::EPE;
  return out;
}

namespace {

class SrpgGuard : public Guard {
 public:
  SrpgGuard(GuardComponents c, GuardConfig cfg) : c_(std::move(c)), cfg_(std::move(cfg)) {}
  GuardMethod method() const override { return GuardMethod::SRPG; }
  GuardOutput guard(std::string_view text, const std::string& id) const override {
    return srpg_guard(text, c_, cfg_, id);
  }

 private:
  GuardComponents c_;
  GuardConfig cfg_;
};

class NoneGuard : public Guard {
 public:
  GuardMethod method() const override { return GuardMethod::None; }
  GuardOutput guard(std::string_view text, const std::string& id) const override { return baseline_none(text, id); }
};

class NaiveGuard : public Guard {
 public:
  GuardMethod method() const override { return GuardMethod::Naive; }
  GuardOutput guard(std::string_view text, const std::string& id) const override {
    return baseline_naive(text, id);
  }
};

class PureLlmGuard : public Guard {
 public:
  explicit PureLlmGuard(GuardComponents c) : c_(std::move(c)) {}
  GuardMethod method() const override { return GuardMethod::PureLLM; }
  GuardOutput guard(std::string_view text, const std::string& id) const override {
    return baseline_pure_llm(text, *c_.client, c_.removal_prompt, id);
  }

 private:
  GuardComponents c_;
};

class EpeGuard : public Guard {
 public:
  explicit EpeGuard(std::string role) : role_(std::move(role)) {}
  GuardMethod method() const override { return GuardMethod::EPE; }
  GuardOutput guard(std::string_view text, const std::string& id) const override {
    return baseline_epe(text, role_, id);
  }

 private:
  std::string role_;
};

}  // namespace

std::unique_ptr<Guard> make_guard(GuardMethod method, GuardComponents components, GuardConfig config) {
  switch (method) {
    case GuardMethod::None: return std::make_unique<NoneGuard>();
    case GuardMethod::Naive: return std::make_unique<NaiveGuard>();
    case GuardMethod::EPE: return std::make_unique<EpeGuard>(config.tutor_role);
    case GuardMethod::PureLLM:
      if (!components.client) throw ConfigError("purellm needs a model backend (mock or http)");
      return std::make_unique<PureLlmGuard>(std::move(components));
    case GuardMethod::SRPG:
      if (!components.gazetteer || !components.reconstructor)
        throw ConfigError("srpg needs a gazetteer and a reconstructor");
      return std::make_unique<SrpgGuard>(std::move(components), std::move(config));
  }
  throw ConfigError("unknown guard method");
}

}  // namespace srpg
