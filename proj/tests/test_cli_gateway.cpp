#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "srpg/cli.hpp"
#include "srpg/evaluator.hpp"
#include "srpg/gateway.hpp"
#include "support.hpp"

using namespace srpg;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run srpg_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "srpg");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) n += !l.empty();
  return n;
}

Json body(const std::string& text, std::optional<std::string> method = std::nullopt) {
  Json j{{"text", text}};
  if (method) j["method"] = *method;
  return j;
}

std::string code_of(const Gateway::Response& r) { return Json::parse(r.body)["error"]["code"]; }

const std::string kMsg = "My name is Alice Chen. x + 50 = 10 in Room 50.";

}  // namespace

TEST_SUITE("cli_gateway") {

TEST_CASE("gen writes the requested count deterministically") {
  auto a = ts::temp_path("cli_gen_a.jsonl"), b = ts::temp_path("cli_gen_b.jsonl");
  CHECK(srpg_cli({"gen", "--seed", "42", "--count", "10", "--out", a}).code == 0);
  CHECK(srpg_cli({"gen", "--seed", "42", "--count", "10", "--out", b}).code == 0);
  CHECK(line_count(a) == 10);
  CHECK(ts::slurp(a) == ts::slurp(b));
  CHECK(load_dialogues(a).size() == 10);
}

TEST_CASE("usage errors exit 2") {
  CHECK(srpg_cli({"gen", "--seed", "42", "--count", "10"}).code == 2);
  CHECK(srpg_cli({"gen", "--seed", "42", "--count", "0", "--out", ts::temp_path("x.jsonl")}).code == 2);
  CHECK(srpg_cli({"frobnicate"}).code == 2);
  CHECK(srpg_cli({}).code == 2);
  auto corpus = ts::temp_path("cli_u_corpus.jsonl");
  save_corpus(ts::corpus(3, 2), corpus);
  auto r = srpg_cli({"guard", "--in", corpus, "--method", "purellm", "--backend", "deterministic", "--out",
                     ts::temp_path("cli_u_out.jsonl")});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(srpg_cli({"guard", "--in", corpus, "--method", "magic", "--out", ts::temp_path("o.jsonl")}).code == 2);
}

TEST_CASE("runtime errors exit 1") {
  CHECK(srpg_cli({"inject", "--in", ts::temp_path("absent.jsonl"), "--profiles", ts::data("profiles.json"),
                  "--seed", "1", "--out", ts::temp_path("o.jsonl")})
            .code == 1);
}

TEST_CASE("offline pipeline through the cli") {
  auto d = ts::temp_path("p_dialogues.jsonl"), c = ts::temp_path("p_corpus.jsonl");
  REQUIRE(srpg_cli({"gen", "--seed", "42", "--count", "60", "--out", d}).code == 0);
  REQUIRE(srpg_cli({"inject", "--in", d, "--profiles", ts::data("profiles.json"), "--seed", "42", "--out", c})
              .code == 0);
  auto corpus = load_corpus(c);
  CHECK(corpus.size() == 60);
  for (const auto& it : corpus) CHECK_FALSE(it.pii.empty());

  std::map<std::string, double> composite;
  for (std::string m : {"none", "naive", "epe", "srpg"}) {
    auto g = ts::temp_path("p_" + m + ".jsonl"), rep = ts::temp_path("p_" + m + ".json");
    REQUIRE(srpg_cli({"guard", "--in", c, "--method", m, "--out", g}).code == 0);
    CHECK(line_count(g) == 60);
    auto r = srpg_cli({"eval", "--pred", g, "--gold", c, "--out", rep});
    CHECK(r.code == 0);
    CHECK(r.out.find(m) != std::string::npos);
    auto report = Json::parse(ts::slurp(rep)).get<MetricsReport>();
    composite[m] = report.composite;
    if (m == "srpg") {
      CHECK(report.asr == 0.0);
      CHECK(report.exact_match_rate >= 0.95);
    }
  }
  for (const auto& [m, v] : composite)
    if (m != "srpg") CHECK(composite["srpg"] > v);

  // purellm over the mock
  auto g = ts::temp_path("p_pure.jsonl");
  CHECK(srpg_cli({"guard", "--in", c, "--method", "purellm", "--backend", "mock", "--out", g}).code == 0);
  CHECK(line_count(g) == 60);
}

TEST_CASE("failing backend leaves no output and writes a manifest") {
  auto c = ts::temp_path("f_corpus.jsonl");
  save_corpus(ts::corpus(8, 5), c);
  auto out = ts::temp_path("f_out.jsonl");
  ts::spit(out, "stale");
  auto r = srpg_cli({"guard", "--in", c, "--method", "purellm", "--backend", "mock", "--mock-mode", "malformed",
                     "--out", out});
  CHECK(r.code == 1);
  CHECK_FALSE(std::filesystem::exists(out));
  auto manifest = Json::parse(ts::slurp(out + ".errors.json"));
  CHECK(manifest.dump().find("backend_malformed_response") != std::string::npos);
}

TEST_CASE("gateway request handling") {
  Gateway gw(ts::runtime());
  std::vector<std::string> logs;
  gw.set_logger([&](const std::string& l) { logs.push_back(l); });

  auto ok = gw.handle_guard(body(kMsg).dump());
  REQUIRE(ok.status == 200);
  auto j = Json::parse(ok.body);
  CHECK(j["method"] == "srpg");
  CHECK(j["masked_text"] == "My name is [MASK]. x + 50 = 10 in Room [MASK].");
  CHECK(j["fused_text"].get<std::string>().find("Alice") == std::string::npos);
  CHECK(j["degraded"] == false);

  CHECK(gw.handle_guard("{not json").status == 400);
  CHECK(gw.handle_guard(Json{{"txt", "hi"}}.dump()).status == 400);
  auto empty = gw.handle_guard(body("").dump());
  CHECK(empty.status == 400);
  CHECK(code_of(empty) == "empty_text");
  CHECK(gw.handle_guard(body("hi", "magic").dump()).status == 422);
  auto unsupported = gw.handle_guard(body("hi", "purellm").dump());
  CHECK(unsupported.status == 422);
  CHECK(code_of(unsupported) == "unsupported_method");
  auto big = gw.handle_guard(body(std::string(40000, 'a')).dump());
  CHECK(big.status == 413);
  // a method that would forward detected PII is refused
  auto none = gw.handle_guard(body(kMsg, "none").dump());
  CHECK(none.status == 500);
  CHECK(code_of(none) == "guard_integrity");
  CHECK(gw.handle_guard(body("x + 1 = 2", "none").dump()).status == 200);

  REQUIRE_FALSE(logs.empty());
  for (const auto& l : logs) {
    CHECK(l.find("Alice") == std::string::npos);
    CHECK(Json::parse(l).contains("status"));
  }
}

TEST_CASE("gateway maps backend failure to 502") {
  auto rt = ts::runtime(BackendKind::Mock, MockMode::Malformed);
  Gateway gw(rt);
  gw.set_logger([](const std::string&) {});
  auto r = gw.handle_guard(body(kMsg, "purellm").dump());
  CHECK(r.status == 502);
  CHECK(code_of(r) == "backend_failure");
  CHECK(r.body.find("Alice") == std::string::npos);
  // srpg keeps serving with the deterministic fallback
  auto s = gw.handle_guard(body(kMsg).dump());
  CHECK(s.status == 200);
  CHECK(Json::parse(s.body)["degraded"] == true);
}

TEST_CASE("raw text is logged only when asked") {
  AppConfig cfg;
  cfg.data_dir = SRPG_DEFAULT_DATA_DIR;
  cfg.gateway.log_raw = true;
  Gateway gw(Runtime::build(cfg));
  std::string last;
  gw.set_logger([&](const std::string& l) { last = l; });
  gw.handle_guard(body(kMsg).dump());
  CHECK(last.find("Alice Chen") != std::string::npos);
}

TEST_CASE("gateway serves concurrent requests over http") {
  Gateway gw(ts::runtime());
  std::mutex mu;
  std::vector<std::string> logs;
  gw.set_logger([&](const std::string& l) {
    std::lock_guard lock(mu);
    logs.push_back(l);
  });
  int port = gw.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread server([&] { gw.run(); });

  auto items = ts::corpus(31, 20);
  std::atomic<int> ok{0}, clean{0};
  std::vector<std::thread> clients;
  for (const auto& it : items)
    clients.emplace_back([&, text = it.injected_text, pii = it.pii] {
      httplib::Client c("127.0.0.1", port);
      c.set_read_timeout(20);
      auto res = c.Post("/v1/guard", body(text).dump(), "application/json");
      if (res && res->status == 200) {
        ++ok;
        if (find_leaks(Json::parse(res->body)["fused_text"].get<std::string>(), pii).empty()) ++clean;
      }
    });
  for (auto& t : clients) t.join();
  httplib::Client c("127.0.0.1", port);
  auto health = c.Get("/healthz");
  gw.stop();
  server.join();

  CHECK(ok == 20);
  CHECK(clean == 20);
  REQUIRE(health);
  CHECK(health->status == 200);
  for (const auto& l : logs)
    for (const auto& it : items)
      for (const auto& r : it.pii) CHECK(l.find(r.surface) == std::string::npos);
}

TEST_CASE("listen parsing") {
  CHECK(parse_listen("127.0.0.1:8088") == std::pair<std::string, int>{"127.0.0.1", 8088});
  CHECK_THROWS_AS(parse_listen("localhost"), ConfigError);
  CHECK_THROWS_AS(parse_listen("h:99999"), ConfigError);
}

}  // TEST_SUITE
