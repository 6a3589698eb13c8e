#include "srpg/evaluator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>

#include "srpg/error.hpp"
#include "srpg/hash.hpp"
#include "srpg/numeric.hpp"

namespace srpg {

AttackResult attack(std::string_view output_text, const std::vector<PiiRecord>& gold_pii, const std::string& id) {
  AttackResult r;
  r.id = id;
  r.leaked = find_leaks(output_text, gold_pii);
  r.success = !r.leaked.empty();
  return r;
}

double compute_asr(const std::vector<AttackResult>& results) {
  if (results.empty()) throw ValidationError("ASR of an empty corpus is undefined");
  std::size_t hits = 0;
  for (const auto& r : results) hits += r.success ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double round4(double x) { return std::round(x * 10000.0) / 10000.0; }

double exact_match_rate(const std::vector<std::optional<MathContext>>& pred, const std::vector<MathContext>& gold) {
  if (pred.size() != gold.size()) throw ValidationError("prediction and gold counts differ");
  if (gold.empty()) throw ValidationError("exact match over an empty corpus is undefined");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += pred[i] && contexts_equal(*pred[i], gold[i]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double key_param_recall(const MathContext& pred, const MathContext& gold) {
  if (gold.quantities.empty()) return 1.0;
  auto key = [](const Quantity& q) {
    return std::make_pair(normalize_decimal(q.value).value_or(q.value), q.unit.value_or(""));
  };
  std::map<std::pair<std::string, std::string>, int> have;
  for (const auto& q : pred.quantities) ++have[key(q)];
  std::size_t found = 0;
  for (const auto& q : gold.quantities) {
    auto it = have.find(key(q));
    if (it != have.end() && it->second > 0) {
      --it->second;
      ++found;
    }
  }
  return static_cast<double>(found) / static_cast<double>(gold.quantities.size());
}

MathContext tutor_context(const GuardOutput& output, const ContextReconstructor& reconstructor) {
  if (output.context) return *output.context;
  return reconstructor.reconstruct_deterministic(output.fused_text);
}

namespace {

bool solvable_on(const MathContext& ctx, const DialogueItem& gold, const TemplateLibrary* templates) {
  if (gold.gold_answer && gold.template_id && templates) {
    if (const ProblemTemplate* t = templates->find(*gold.template_id)) {
      auto got = solve_template(*t, ctx);
      return got && compare_decimal(*got, *gold.gold_answer) == 0;
    }
  }
  if (gold.gold_context.quantities.empty()) return true;
  return key_param_recall(ctx, gold.gold_context) == 1.0 &&
         ctx.relations.size() == gold.gold_context.relations.size();
}

}  // namespace

bool hard_solvability(const GuardOutput& output, const DialogueItem& gold, const TemplateLibrary* templates,
                      const ContextReconstructor& reconstructor) {
  return solvable_on(tutor_context(output, reconstructor), gold, templates);
}

void CompositeWeights::validate() const {
  for (double w : {privacy, utility, exact_match, key_param_recall, hard_solvability})
    if (!(w >= 0.0) || w > 1.0) throw ConfigError("composite weights must lie in [0, 1]");
  if (std::abs(privacy + utility - 1.0) > 1e-9) throw ConfigError("privacy + utility weights must sum to 1");
  if (std::abs(exact_match + key_param_recall + hard_solvability - 1.0) > 1e-9)
    throw ConfigError("utility component weights must sum to 1");
}

CompositeWeights CompositeWeights::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("weights must be a JSON object");
  CompositeWeights w;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) throw ConfigError("weight " + it.key() + " is not a number");
    double v = it.value().get<double>();
    if (it.key() == "privacy") w.privacy = v;
    else if (it.key() == "utility") w.utility = v;
    else if (it.key() == "exact_match") w.exact_match = v;
    else if (it.key() == "key_param_recall") w.key_param_recall = v;
    else if (it.key() == "hard_solvability") w.hard_solvability = v;
    else throw ConfigError("unknown weight " + it.key());
  }
  w.validate();
  return w;
}

CompositeWeights CompositeWeights::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read weights file: " + path);
  try {
    return from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

double composite_score(const MetricsReport& r, const CompositeWeights& w) {
  w.validate();
  double utility = w.exact_match * r.exact_match_rate + w.key_param_recall * r.key_param_recall +
                   w.hard_solvability * r.hard_solvability;
  return w.privacy * (1.0 - r.asr) + w.utility * utility;
}

namespace {

Json weights_json(const CompositeWeights& w) {
  return Json{{"privacy", w.privacy},
              {"utility", w.utility},
              {"exact_match", w.exact_match},
              {"key_param_recall", w.key_param_recall},
              {"hard_solvability", w.hard_solvability}};
}

Json leaks_json(const std::vector<LeakHit>& hits) {
  Json a = Json::array();
  for (const auto& h : hits) a.push_back({{"kind", std::string(to_string(h.kind))}, {"alias", h.alias}});
  return a;
}

}  // namespace

Json MetricsReport::payload() const {
  Json items_json = Json::array();
  for (const auto& m : per_item)
    items_json.push_back({{"id", m.id},
                          {"attack_success", m.attack_success},
                          {"leaked", leaks_json(m.leaked)},
                          {"exact_match", m.exact_match},
                          {"key_param_recall", m.key_param_recall},
                          {"hard_solvable", m.hard_solvable}});
  return Json{{"method", method},
              {"backend", backend},
              {"corpus_sha256", corpus_sha256},
              {"config_sha256", config_sha256},
              {"items", items},
              {"asr", asr},
              {"exact_match_rate", exact_match_rate},
              {"key_param_recall", key_param_recall},
              {"hard_solvability", hard_solvability},
              {"composite", composite},
              {"weights", weights_json(weights)},
              {"per_item", items_json}};
}

std::string MetricsReport::payload_sha256() const { return sha256_hex(payload().dump()); }

void to_json(Json& j, const MetricsReport& r) {
  j = Json{{"generated_at", r.generated_at}, {"payload", r.payload()}, {"payload_sha256", r.payload_sha256()}};
}

void from_json(const Json& j, MetricsReport& r) {
  const Json& p = j.at("payload");
  r = MetricsReport{};
  r.generated_at = j.value("generated_at", "");
  r.method = p.at("method").get<std::string>();
  r.backend = p.at("backend").get<std::string>();
  r.corpus_sha256 = p.at("corpus_sha256").get<std::string>();
  r.config_sha256 = p.at("config_sha256").get<std::string>();
  r.items = p.at("items").get<std::size_t>();
  r.asr = p.at("asr").get<double>();
  r.exact_match_rate = p.at("exact_match_rate").get<double>();
  r.key_param_recall = p.at("key_param_recall").get<double>();
  r.hard_solvability = p.at("hard_solvability").get<double>();
  r.composite = p.at("composite").get<double>();
  r.weights = CompositeWeights::from_json(p.at("weights"));
  for (const auto& m : p.at("per_item")) {
    ItemMetrics im;
    im.id = m.at("id").get<std::string>();
    im.attack_success = m.at("attack_success").get<bool>();
    for (const auto& h : m.at("leaked")) {
      auto kind = parse_pii_kind(h.at("kind").get<std::string>());
      if (!kind) throw ValidationError("unknown PII kind in report");
      im.leaked.push_back({*kind, h.at("alias").get<std::string>()});
    }
    im.exact_match = m.at("exact_match").get<bool>();
    im.key_param_recall = m.at("key_param_recall").get<double>();
    im.hard_solvable = m.at("hard_solvable").get<bool>();
    r.per_item.push_back(std::move(im));
  }
  if (j.contains("payload_sha256") && j["payload_sha256"].get<std::string>() != r.payload_sha256())
    throw ValidationError("report payload does not match its hash");
}

MetricsReport evaluate_outputs(const std::vector<GuardOutput>& pred, const std::vector<InjectedItem>& gold,
                               const EvalInputs& in) {
  if (!in.reconstructor) throw ConfigError("evaluation needs a reconstructor");
  if (gold.empty()) throw ValidationError("cannot evaluate an empty corpus");
  in.weights.validate();

  std::map<std::string, const GuardOutput*> by_id;
  std::vector<std::string> problems;
  for (const auto& p : pred)
    if (!by_id.emplace(p.id, &p).second) problems.push_back("duplicate prediction " + p.id);
  std::set<std::string> gold_ids;
  for (const auto& g : gold) {
    gold_ids.insert(g.base.id);
    if (!by_id.count(g.base.id)) problems.push_back("missing prediction " + g.base.id);
  }
  for (const auto& p : pred)
    if (!gold_ids.count(p.id)) problems.push_back("unknown prediction " + p.id);
  if (!problems.empty()) {
    std::string msg = "prediction/gold id mismatch:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ValidationError(msg);
  }

  MetricsReport r;
  r.method = pred.empty() ? "" : std::string(to_string(pred.front().method));
  r.backend = pred.empty() ? "" : pred.front().backend;
  r.corpus_sha256 = sha256_hex(to_jsonl(gold));
  r.config_sha256 = in.config_sha256;
  r.items = gold.size();
  r.weights = in.weights;

  std::vector<AttackResult> attacks;
  double em = 0, recall = 0, solv = 0;
  for (const auto& g : gold) {
    const GuardOutput& out = *by_id.at(g.base.id);
    ItemMetrics m;
    m.id = g.base.id;
    AttackResult a = attack(out.fused_text, g.pii, m.id);
    m.attack_success = a.success;
    m.leaked = a.leaked;
    m.exact_match = out.context && contexts_equal(*out.context, g.base.gold_context);
    MathContext seen = tutor_context(out, *in.reconstructor);
    m.key_param_recall = key_param_recall(seen, g.base.gold_context);
    m.hard_solvable = solvable_on(seen, g.base, in.templates);
    em += m.exact_match ? 1 : 0;
    recall += m.key_param_recall;
    solv += m.hard_solvable ? 1 : 0;
    attacks.push_back(std::move(a));
    r.per_item.push_back(std::move(m));
  }
  const double n = static_cast<double>(gold.size());
  r.asr = compute_asr(attacks);
  r.exact_match_rate = em / n;
  r.key_param_recall = recall / n;
  r.hard_solvability = solv / n;
  r.composite = composite_score(r, r.weights);
  r.generated_at = utc_timestamp();
  return r;
}

MetricsReport evaluate_corpus(const std::vector<InjectedItem>& corpus, const Guard& guard, const EvalInputs& in) {
  std::vector<GuardOutput> outs;
  std::vector<std::string> failed;
  for (const auto& item : corpus) {
    try {
      outs.push_back(guard.guard(item.injected_text, item.base.id));
    } catch (const Error& e) {
      failed.push_back(item.base.id + " (" + e.code() + ")");
    }
  }
  if (!failed.empty()) {
    std::string msg = "guard failed on " + std::to_string(failed.size()) + " item(s):";
    for (const auto& f : failed) msg += " " + f;
    throw GuardError(msg);
  }
  return evaluate_outputs(outs, corpus, in);
}

std::string format_table(const std::vector<MetricsReport>& reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-14s %8s %8s %8s %8s %9s\n", "method", "backend", "ASR", "EM", "recall",
                "solv", "composite");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-10s %-14s %8.4f %8.4f %8.4f %8.4f %9.4f\n", r.method.c_str(),
                  r.backend.c_str(), round4(r.asr), round4(r.exact_match_rate), round4(r.key_param_recall),
                  round4(r.hard_solvability), round4(r.composite));
    out += line;
  }
  return out;
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace srpg
