#include <random>

#include "doctest.h"
#include "srpg/config.hpp"
#include "srpg/error.hpp"
#include "srpg/evaluator.hpp"
#include "support.hpp"

using namespace srpg;

namespace {

PiiRecord rec(PiiKind kind, std::string canonical, std::vector<std::string> aliases, std::string surface) {
  PiiRecord r;
  r.kind = kind;
  r.canonical = std::move(canonical);
  r.aliases = std::move(aliases);
  r.surface = std::move(surface);
  return r;
}

std::vector<AttackResult> results(int successes, int total) {
  std::vector<AttackResult> v(total);
  for (int i = 0; i < successes; ++i) v[i].success = true;
  return v;
}

Quantity q(std::string v, std::optional<std::string> unit = std::nullopt) { return {std::move(v), std::move(unit), std::nullopt}; }

MathContext ctx_with(std::vector<Quantity> qs) {
  MathContext c;
  c.quantities = std::move(qs);
  return c;
}

EvalInputs inputs() {
  EvalInputs in;
  in.reconstructor = ts::reconstructor().get();
  in.templates = &ts::templates();
  in.config_sha256 = std::string(64, 'a');
  return in;
}

}  // namespace

TEST_SUITE("evaluator") {

TEST_CASE("attack matches aliases, not only the surface") {
  auto name = rec(PiiKind::PersonName, "alice chen", {"alice chen", "alice", "chen"}, "Alice Chen");
  auto phone = rec(PiiKind::PhoneNumber, "5550142", {"555-0142"}, "555-0142");
  CHECK_FALSE(attack("User [MASK] asks about x + 1 = 2", {name, phone}).success);
  auto hit = attack("ALICE asked a question", {name, phone}, "i1");
  CHECK(hit.success);
  CHECK(hit.id == "i1");
  REQUIRE(hit.leaked.size() == 1);
  CHECK(hit.leaked[0].kind == PiiKind::PersonName);
  CHECK(attack("call (555) 0142", {phone}).success);
  // math digits near but not equal to the phone digits
  CHECK_FALSE(attack("x = 555 and y = 14", {phone}).success);
  // aliases are whole words
  CHECK_FALSE(attack("the chenille scarf", {name}).success);
}

TEST_CASE("asr is the success fraction") {
  CHECK(round4(compute_asr(results(5, 13))) == doctest::Approx(0.3846));
  CHECK(compute_asr(results(0, 4)) == 0.0);
  CHECK(compute_asr(results(4, 4)) == 1.0);
  CHECK_THROWS_AS(compute_asr({}), ValidationError);
}

TEST_CASE("asr never drops when a leaking item is added") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + static_cast<int>(rng() % 40);
    auto v = results(static_cast<int>(rng() % (n + 1)), n);
    double before = compute_asr(v);
    v.push_back(AttackResult{"", {}, true});
    CHECK(compute_asr(v) >= before);
  }
}

TEST_CASE("exact match rate") {
  std::vector<MathContext> gold;
  std::vector<std::optional<MathContext>> pred;
  for (int i = 0; i < 10; ++i) {
    auto g = ctx_with({q(std::to_string(i + 1), "cm")});
    gold.push_back(g);
    if (i % 2 == 0) {
      pred.emplace_back(g);
    } else if (i == 1) {
      pred.emplace_back(std::nullopt);
    } else {
      pred.emplace_back(ctx_with({q("99", "cm")}));
    }
  }
  CHECK(exact_match_rate(pred, gold) == doctest::Approx(0.5));
  CHECK_THROWS(exact_match_rate({std::nullopt}, {}));
}

TEST_CASE("key parameter recall") {
  auto gold = ctx_with({q("5", "cm"), q("3", "cm"), q("10"), q("2", "kg")});
  auto pred = ctx_with({q("5", "cm"), q("10"), q("2", "g"), q("3", "cm"), q("7")});
  CHECK(key_param_recall(pred, gold) == doctest::Approx(0.75));
  // multiset: one predicted 5 cannot cover two gold 5s
  CHECK(key_param_recall(ctx_with({q("5")}), ctx_with({q("5"), q("5")})) == doctest::Approx(0.5));
  CHECK(key_param_recall(ctx_with({}), ctx_with({})) == 1.0);
  CHECK(key_param_recall(ctx_with({}), gold) == 0.0);
}

TEST_CASE("composite examples") {
  MetricsReport r;
  r.asr = 0.0;
  r.exact_match_rate = 1.0;
  r.key_param_recall = 1.0;
  r.hard_solvability = 1.0;
  CHECK(composite_score(r, {}) == doctest::Approx(1.0));
  r.asr = 1.0;
  CHECK(composite_score(r, {}) == doctest::Approx(0.5));
  r.asr = 0.2;
  r.exact_match_rate = 0.5;
  r.key_param_recall = 0.8;
  r.hard_solvability = 0.2;
  // 0.5 * 0.8 + 0.5 * (0.5 + 0.8 + 0.2) / 3
  CHECK(composite_score(r, {}) == doctest::Approx(0.4 + 0.25));
  CompositeWeights privacy_only{1.0, 0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(composite_score(r, privacy_only) == doctest::Approx(0.8));
}

TEST_CASE("invalid weights are rejected") {
  CHECK_THROWS_AS(CompositeWeights::from_json(Json{{"privacy", 0.7}, {"utility", 0.7}}), ConfigError);
  CHECK_THROWS_AS(CompositeWeights::from_json(Json{{"privacy", -0.5}, {"utility", 1.5}}), ConfigError);
  CHECK_THROWS_AS(CompositeWeights::from_json(Json{{"exact_match", 0.5}}), ConfigError);
  CHECK_THROWS_AS(CompositeWeights::from_json(Json{{"privacy", "half"}}), ConfigError);
  CHECK_THROWS_AS(CompositeWeights::from_json(Json{{"privacy", 0.5}, {"bonus", 0.5}}), ConfigError);
  auto w = CompositeWeights::from_json(Json{{"privacy", 0.25}, {"utility", 0.75}});
  CHECK(w.privacy == 0.25);
  CHECK_NOTHROW(CompositeWeights::load(ts::data("weights.json")));
}

TEST_CASE("report json round-trip and tamper check") {
  auto corpus = ts::corpus(5, 40);
  auto rt = ts::runtime();
  auto rep = evaluate_corpus(corpus, *rt.guard(GuardMethod::SRPG), inputs());
  rep.corpus_sha256 = std::string(64, 'b');
  Json j = rep;
  CHECK(j.contains("generated_at"));
  CHECK(j.contains("payload"));
  CHECK(j["payload_sha256"].get<std::string>().size() == 64);
  CHECK_FALSE(j["payload"].contains("generated_at"));
  auto back = j.get<MetricsReport>();
  CHECK(back.payload() == rep.payload());
  CHECK(back.payload_sha256() == rep.payload_sha256());

  // same inputs, later run: only the timestamp may differ
  auto again = evaluate_corpus(corpus, *rt.guard(GuardMethod::SRPG), inputs());
  again.corpus_sha256 = rep.corpus_sha256;
  CHECK(again.payload_sha256() == rep.payload_sha256());

  Json bad = j;
  bad["payload"]["asr"] = 0.5;
  CHECK_THROWS_AS(bad.get<MetricsReport>(), ValidationError);
}

TEST_CASE("outputs must line up with the gold ids") {
  auto corpus = ts::corpus(5, 4);
  std::vector<GuardOutput> outs;
  for (const auto& it : corpus) outs.push_back(baseline_none(it.injected_text, it.base.id));
  std::reverse(outs.begin(), outs.end());
  CHECK_NOTHROW(evaluate_outputs(outs, corpus, inputs()));
  outs[0].id = "stranger";
  try {
    evaluate_outputs(outs, corpus, inputs());
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("stranger") != std::string::npos);
  }
  outs.pop_back();
  CHECK_THROWS_AS(evaluate_outputs(outs, corpus, inputs()), ValidationError);
}

TEST_CASE("metrics stay in [0, 1] and srpg ranks first") {
  auto corpus = ts::corpus(2024, 300);
  auto det = ts::runtime();
  auto mock = ts::runtime(BackendKind::Mock, MockMode::Faithful);
  std::map<std::string, MetricsReport> reps;
  for (auto m : {GuardMethod::None, GuardMethod::Naive, GuardMethod::EPE, GuardMethod::SRPG})
    reps[std::string(to_string(m))] = evaluate_corpus(corpus, *det.guard(m), inputs());
  reps["purellm"] = evaluate_corpus(corpus, *mock.guard(GuardMethod::PureLLM), inputs());
  for (const auto& [name, r] : reps) {
    CAPTURE(name);
    for (double v : {r.asr, r.exact_match_rate, r.key_param_recall, r.hard_solvability, r.composite}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(r.items == corpus.size());
    CHECK(r.per_item.size() == corpus.size());
    // asr recomputed from per-item verdicts
    std::size_t hits = 0;
    for (const auto& it : r.per_item) hits += it.attack_success;
    CHECK(r.asr == doctest::Approx(double(hits) / corpus.size()));
    if (name != "srpg") CHECK(reps["srpg"].composite > r.composite);
  }
  CHECK(reps["srpg"].asr == 0.0);
  CHECK(reps["none"].asr == 1.0);
  CHECK(reps["srpg"].exact_match_rate >= 0.95);
}

TEST_CASE("table formatting") {
  MetricsReport r;
  r.method = "srpg";
  r.backend = "deterministic";
  r.asr = 0.123456;
  auto t = format_table({r});
  CHECK(t.find("srpg") != std::string::npos);
  CHECK(t.find("0.1235") != std::string::npos);
}

}  // TEST_SUITE
