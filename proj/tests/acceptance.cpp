// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "srpg/cli.hpp"
#include "srpg/evaluator.hpp"
#include "srpg/gateway.hpp"
#include "srpg/mock_backend.hpp"
#include "srpg/sanitizer.hpp"
#include "support.hpp"

using namespace srpg;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "srpg");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

std::string dir;
std::string path(const std::string& name) { return dir + "/" + name; }

MetricsReport report(const std::string& file) { return Json::parse(ts::slurp(path(file))).get<MetricsReport>(); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// gen -> inject -> guard -> eval for one method into files tagged `tag`
bool pipeline(const std::string& tag, const std::string& corpus, const std::string& method,
              const std::vector<std::string>& extra = {}) {
  std::vector<std::string> g{"guard", "--in", corpus, "--method", method, "--out", path(tag + ".out.jsonl")};
  g.insert(g.end(), extra.begin(), extra.end());
  if (run_cli(g) != 0) return false;
  std::string table;
  int code = run_cli({"eval", "--pred", path(tag + ".out.jsonl"), "--gold", corpus, "--out", path(tag + ".json")},
                     &table);
  return code == 0 || (method != "srpg" && code == 1);
}

bool build_corpus(const std::string& tag, std::uint64_t seed, std::size_t count, const std::string& style = "") {
  if (run_cli({"gen", "--seed", std::to_string(seed), "--count", std::to_string(count), "--out",
               path(tag + ".dialogues.jsonl")}) != 0)
    return false;
  std::vector<std::string> inj{"inject", "--in", path(tag + ".dialogues.jsonl"), "--profiles",
                               ts::data("profiles.json"), "--seed", std::to_string(seed), "--out",
                               path(tag + ".corpus.jsonl")};
  if (!style.empty()) {
    inj.push_back("--style");
    inj.push_back(style);
  }
  return run_cli(inj) == 0;
}

// Criteria 1-5 in one pass; returns the payload hashes of every report.
std::vector<std::string> pass_one_to_five(const std::string& run, std::vector<Check>& out) {
  out.assign(5, {});
  std::vector<std::string> hashes;
  const std::string main = run + "main";
  auto t0 = std::chrono::steady_clock::now();
  bool built = build_corpus(main, 42, 500);
  bool srpg_ok = built && pipeline(run + "srpg", path(main + ".corpus.jsonl"), "srpg");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // 1
  out[0].expect(srpg_ok, "srpg pipeline failed");
  if (srpg_ok) {
    auto r = report(run + "srpg.json");
    out[0].expect(r.items == 500, "expected 500 items");
    out[0].expect(r.asr == 0.0, "asr " + fmt(r.asr));
    out[0].expect(secs < 30.0, "took " + fmt(secs) + " s");
    out[0].detail = out[0].ok ? "asr=" + fmt(r.asr) + " in " + fmt(secs) + " s" : out[0].detail;
    hashes.push_back(r.payload_sha256());
  }
  // 2
  if (built && pipeline(run + "none", path(main + ".corpus.jsonl"), "none")) {
    auto r = report(run + "none.json");
    out[1].expect(r.asr == 1.0, "asr " + fmt(r.asr));
    if (out[1].ok) out[1].detail = "asr=" + fmt(r.asr);
    hashes.push_back(r.payload_sha256());
  } else {
    out[1].expect(false, "none pipeline failed");
  }
  // 3
  bool ent = build_corpus(run + "ent", 42, 200, "entangled") &&
             pipeline(run + "epe_ent", path(run + "ent.corpus.jsonl"), "epe");
  bool str = build_corpus(run + "str", 42, 200, "structured") &&
             pipeline(run + "epe_str", path(run + "str.corpus.jsonl"), "epe");
  out[2].expect(ent && str, "epe pipeline failed");
  if (ent && str) {
    auto a = report(run + "epe_ent.json"), b = report(run + "epe_str.json");
    out[2].expect(a.asr == 1.0, "entangled asr " + fmt(a.asr));
    out[2].expect(b.asr == 0.0, "structured asr " + fmt(b.asr));
    if (out[2].ok) out[2].detail = "entangled asr=" + fmt(a.asr) + ", structured asr=" + fmt(b.asr);
    hashes.push_back(a.payload_sha256());
    hashes.push_back(b.payload_sha256());
  }
  // 4
  if (built && srpg_ok && pipeline(run + "naive", path(main + ".corpus.jsonl"), "naive")) {
    auto s = report(run + "srpg.json"), n = report(run + "naive.json");
    out[3].expect(s.key_param_recall == 1.0, "srpg recall " + fmt(s.key_param_recall));
    out[3].expect(s.hard_solvability == 1.0, "srpg solvability " + fmt(s.hard_solvability));
    out[3].expect(n.key_param_recall < 0.25, "naive recall " + fmt(n.key_param_recall));
    out[3].expect(n.hard_solvability < 0.25, "naive solvability " + fmt(n.hard_solvability));
    if (out[3].ok)
      out[3].detail = "recall srpg=" + fmt(s.key_param_recall) + " naive=" + fmt(n.key_param_recall) +
                      ", solvability srpg=" + fmt(s.hard_solvability) + " naive=" + fmt(n.hard_solvability);
    hashes.push_back(n.payload_sha256());
  } else {
    out[3].expect(false, "naive pipeline failed");
  }
  // 5
  if (built) {
    auto items = load_dialogues(path(main + ".dialogues.jsonl"));
    std::vector<std::optional<MathContext>> pred;
    std::vector<MathContext> gold;
    for (const auto& it : items) {
      pred.emplace_back(ts::reconstructor()->reconstruct_deterministic(it.turn_text));
      gold.push_back(it.gold_context);
    }
    double em = exact_match_rate(pred, gold);
    out[4].expect(items.size() == 500, "expected 500 items");
    out[4].expect(em == 1.0, "exact match " + fmt(em));
    if (out[4].ok) out[4].detail = "exact_match=" + fmt(em) + " over " + std::to_string(items.size());
    std::string joined;
    for (const auto& p : pred) joined += canonical_serialize(*p) + "\n";
    hashes.push_back(joined);
  } else {
    out[4].expect(false, "corpus generation failed");
  }
  return hashes;
}

Check leak_fuzz() {
  Check c;
  auto guard = ts::runtime().guard(GuardMethod::SRPG);
  auto base = generate_synthetic(6, 100, ts::templates());
  std::size_t n = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto& item = base[seed % base.size()];
    auto inj = inject_pii(item, ts::profiles()[(seed * 7) % ts::profiles().size()], seed, ts::bank(),
                          *ts::gazetteer());
    try {
      auto out = guard->guard(inj.injected_text, item.id);
      c.expect(verify_no_leak(out.fused_text, inj.pii), "leak at seed " + std::to_string(seed));
    } catch (const Error& e) {
      c.expect(false, "guard error at seed " + std::to_string(seed) + ": " + e.code());
    }
    ++n;
  }
  if (c.ok) c.detail = std::to_string(n) + " items, no leaks";
  return c;
}

Check golden() {
  Check c;
  GuardConfig cfg;
  cfg.summarize_prefix = true;
  auto out = srpg_guard(ts::slurp(ts::fixture("geometry_input.txt")), ts::runtime().components, cfg);
  c.expect(out.fused_text == ts::slurp(ts::fixture("geometry_fused.txt")), "fused text differs from fixture");
  if (c.ok) c.detail = "byte-identical";
  return c;
}

Check failure_paths() {
  Check c;
  const std::string text = "In Triangle ABC near Haidian District, side AB=5 and angle C=90. Find the area.";
  auto hits = records_from_spans(detect_pii(text, *ts::gazetteer(), DetectionPolicy::strict()));
  auto prompt = PromptTemplate::load(ts::data("prompts/reconstruct.txt"));
  auto rc = ts::reconstructor();
  auto gold = rc->reconstruct_deterministic(text);

  MockBackend leaky(MockMode::Leaky, rc);
  auto l = rc->reconstruct_llm(text, leaky, prompt, text);
  c.expect(find_leaks(canonical_serialize(l.context), hits).empty(), "leaky context keeps an identifier");
  c.expect(find_leaks(render_supplement(l.context), hits).empty(), "leaky supplement keeps an identifier");
  auto leak_hits = detect_pii(canonical_serialize(l.context), *ts::gazetteer(), DetectionPolicy::strict());
  c.expect(leak_hits.empty(), "detector still fires on the leaky context");

  MockBackend bad(MockMode::Malformed, rc);
  auto m = rc->reconstruct_llm(text, bad, prompt, text);
  c.expect(m.degraded && m.failure.has_value() && m.attempts == 2, "malformed did not repair then fall back");
  c.expect(m.context == gold, "malformed fallback differs from the parser");

  MockBackend slow(MockMode::Slow, rc);
  auto s = rc->reconstruct_llm(text, slow, prompt, text);
  c.expect(s.degraded && s.failure == std::optional<std::string>("timeout"), "slow did not fall back on timeout");
  c.expect(s.context == gold, "timeout fallback differs from the parser");
  if (c.ok)
    c.detail = "leaky filtered, malformed -> " + m.failure.value_or("?") + " fallback, slow -> " +
               s.failure.value_or("?") + " fallback";
  return c;
}

Check gateway() {
  Check c;
  auto corpus = load_corpus(ts::fixture("gateway_corpus.jsonl"));
  c.expect(corpus.size() == 20, "fixture corpus size");
  std::mutex mu;
  std::vector<std::string> logs;
  auto logger = [&](const std::string& l) {
    std::lock_guard lock(mu);
    logs.push_back(l);
  };
  Gateway gw(ts::runtime());
  gw.set_logger(logger);
  int port = gw.bind("127.0.0.1", 0);
  std::thread server([&] { gw.run(); });
  std::atomic<int> good{0};
  std::vector<std::thread> clients;
  for (const auto& it : corpus)
    clients.emplace_back([&, text = it.injected_text, pii = it.pii] {
      httplib::Client cl("127.0.0.1", port);
      cl.set_read_timeout(30);
      auto res = cl.Post("/v1/guard", Json{{"text", text}}.dump(), "application/json");
      if (res && res->status == 200 &&
          verify_no_leak(Json::parse(res->body)["fused_text"].get<std::string>(), pii) &&
          find_leaks(res->body, pii).empty())
        ++good;
    });
  for (auto& t : clients) t.join();
  httplib::Client cl("127.0.0.1", port);
  auto empty = cl.Post("/v1/guard", Json{{"text", ""}}.dump(), "application/json");
  gw.stop();
  server.join();
  c.expect(good == 20, std::to_string(good.load()) + "/20 clean 200 responses");
  c.expect(empty && empty->status == 400, "empty text was not 400");

  // forced backend failure
  Gateway failing(ts::runtime(BackendKind::Mock, MockMode::Malformed));
  std::vector<std::string> flogs;
  failing.set_logger([&](const std::string& l) { flogs.push_back(l); });
  const auto& item = corpus.front();
  auto r = failing.handle_guard(Json{{"text", item.injected_text}, {"method", "purellm"}}.dump());
  c.expect(r.status == 502, "forced failure returned " + std::to_string(r.status));
  c.expect(find_leaks(r.body, item.pii).empty() && r.body.find(item.injected_text) == std::string::npos,
           "raw text in 502 body");
  for (const auto* set : {&logs, &flogs})
    for (const auto& l : *set)
      for (const auto& it : corpus) c.expect(find_leaks(l, it.pii).empty(), "raw text in a log line");
  if (c.ok) c.detail = "20/20 clean, empty=400, forced failure=502";
  return c;
}

}  // namespace

int main() {
  dir = ts::temp_path("acceptance");
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::vector<Check> first, second;
  std::vector<Check> checks(10);
  auto h1 = pass_one_to_five("a_", first);
  auto h2 = pass_one_to_five("b_", second);
  for (int i = 0; i < 5; ++i) checks[i] = first[i];
  auto run_safe = [](const std::function<Check()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      Check c;
      c.expect(false, std::string("exception: ") + e.what());
      return c;
    }
  };
  checks[5] = run_safe(leak_fuzz);
  checks[6] = run_safe(golden);
  checks[7] = run_safe(failure_paths);
  checks[8] = run_safe(gateway);

  bool files_same = true;
  for (std::string f : {"main.dialogues.jsonl", "main.corpus.jsonl", "srpg.out.jsonl", "none.out.jsonl",
                        "naive.out.jsonl", "ent.corpus.jsonl", "str.corpus.jsonl"})
    files_same = files_same && ts::slurp(path("a_" + f)) == ts::slurp(path("b_" + f));
  checks[9].expect(h1.size() == 6 && h1 == h2, "report payload hashes differ between runs");
  checks[9].expect(files_same, "intermediate files differ between runs");
  if (checks[9].ok) checks[9].detail = std::to_string(h1.size()) + " reports identical across reruns";

  const char* names[] = {"zero leakage (srpg, 500 items)", "none baseline leaks everything",
                         "epe leaks on entangled, not on structured", "utility separation srpg vs naive",
                         "deterministic exact match vs gold", "leak-freedom fuzz (1000 seeds)",
                         "fusion golden fixture", "mock backend failure paths", "gateway contract",
                         "determinism of reruns"};
  int failed = 0;
  for (int i = 0; i < 10; ++i) {
    std::cout << (checks[i].ok ? "PASS" : "FAIL") << " " << i + 1 << " " << names[i];
    if (!checks[i].detail.empty()) std::cout << ": " << checks[i].detail;
    std::cout << "\n";
    failed += !checks[i].ok;
  }
  fs::remove_all(dir);
  return failed == 0 ? 0 : 1;
}
