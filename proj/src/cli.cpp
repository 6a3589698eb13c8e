#include "srpg/cli.hpp"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "srpg/config.hpp"
#include "srpg/corpus.hpp"
#include "srpg/error.hpp"
#include "srpg/evaluator.hpp"
#include "srpg/gateway.hpp"

namespace srpg::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

AppConfig load_config(const std::string& path) { return path.empty() ? AppConfig{} : AppConfig::load(path); }

void write_file(const std::string& path, const std::string& body) {
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) throw IoError("cannot write " + path);
  o << body;
  if (!o) throw IoError("write failed: " + path);
}

std::vector<GuardOutput> load_outputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read predictions: " + path);
  std::vector<GuardOutput> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line).get<GuardOutput>());
    } catch (const std::exception& e) {
      throw ValidationError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

Gateway* g_serving = nullptr;
extern "C" void on_signal(int) {
  if (g_serving) g_serving->stop();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"srpg: privacy guard for tutoring messages"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 42;
  std::size_t count = 0;
  std::string in_path, out_path, templates_path, profiles_path, style_name;
  std::string method_name, backend_name, mock_mode_name;
  std::string pred_path, gold_path, weights_path;
  std::string listen, upstream;

  auto* gen = app.add_subcommand("gen", "generate synthetic dialogue items");
  gen->add_option("--seed", seed, "random seed")->required();
  gen->add_option("--count", count, "number of items")->required()->check(CLI::PositiveNumber);
  gen->add_option("--out", out_path, "output JSONL")->required();
  gen->add_option("--templates", templates_path, "problem template file");
  gen->add_option("--config", config_path, "config JSON");

  auto* inject = app.add_subcommand("inject", "inject PII into dialogue items");
  inject->add_option("--in", in_path, "dialogue JSONL")->required();
  inject->add_option("--profiles", profiles_path, "profile JSON")->required();
  inject->add_option("--seed", seed, "random seed")->required();
  inject->add_option("--out", out_path, "corpus JSONL")->required();
  inject->add_option("--style", style_name, "free|structured|entangled (default: mixed)")
      ->check(CLI::IsMember({"free", "structured", "entangled"}));
  inject->add_option("--config", config_path, "config JSON");

  auto* ingest = app.add_subcommand("ingest", "read MathDial-style JSONL into dialogue items");
  ingest->add_option("--in", in_path, "source JSONL")->required();
  ingest->add_option("--out", out_path, "dialogue JSONL")->required();
  ingest->add_option("--config", config_path, "config JSON");

  auto* guard = app.add_subcommand("guard", "guard every item of a corpus");
  guard->add_option("--in", in_path, "corpus JSONL")->required();
  guard->add_option("--method", method_name, "none|naive|purellm|epe|srpg")
      ->required()
      ->check(CLI::IsMember({"none", "naive", "purellm", "epe", "srpg"}));
  guard->add_option("--backend", backend_name, "deterministic|mock|http")
      ->check(CLI::IsMember({"deterministic", "mock", "http"}));
  guard->add_option("--mock-mode", mock_mode_name, "faithful|leaky|malformed|slow")
      ->check(CLI::IsMember({"faithful", "leaky", "malformed", "slow"}));
  guard->add_option("--config", config_path, "config JSON");
  guard->add_option("--out", out_path, "guard output JSONL")->required();

  auto* eval = app.add_subcommand("eval", "score guard outputs against the gold corpus");
  eval->add_option("--pred", pred_path, "guard output JSONL")->required();
  eval->add_option("--gold", gold_path, "corpus JSONL")->required();
  eval->add_option("--out", out_path, "report JSON")->required();
  eval->add_option("--weights", weights_path, "composite weights JSON");
  eval->add_option("--config", config_path, "config JSON");

  auto* serve = app.add_subcommand("serve", "run the HTTP gateway");
  serve->add_option("--listen", listen, "HOST:PORT");
  serve->add_option("--config", config_path, "config JSON");
  serve->add_option("--upstream", upstream, "relay fused_text to this URL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
      err << sub->help();
    else
      err << app.help();
    return kExitUsage;
  }

  try {
    AppConfig cfg = load_config(config_path);

    if (*gen) {
      auto lib = TemplateLibrary::load(cfg.data_path(templates_path.empty() ? cfg.templates : templates_path,
                                                     "problem_templates.json"));
      auto items = generate_synthetic(seed, count, lib);
      save_dialogues(items, out_path);
      out << items.size() << "\n";
      return kExitOk;
    }

    if (*inject) {
      auto items = load_dialogues(in_path);
      auto profiles = load_profiles(profiles_path);
      auto bank = InjectionBank::load(cfg.data_path(cfg.injection_bank, "injection_templates.json"));
      Gazetteer gaz = Gazetteer::load(cfg.data_path(cfg.gazetteer, "gazetteer.json"));
      std::optional<InjectionStyle> style;
      if (!style_name.empty()) style = parse_injection_style(style_name);
      auto corpus = inject_corpus(items, profiles, seed, bank, gaz, style);
      save_corpus(corpus, out_path);
      out << corpus.size() << "\n";
      return kExitOk;
    }

    if (*ingest) {
      Runtime rt = Runtime::build(cfg);
      auto res = ingest_mathdial(in_path, *rt.reconstructor);
      for (const auto& [line, reason] : res.skipped) err << "skipped line " << line << ": " << reason << "\n";
      for (const auto& w : res.warnings) err << "warning: " << w << "\n";
      save_dialogues(res.items, out_path);
      out << res.items.size() << "\n";
      return kExitOk;
    }

    if (*guard) {
      GuardMethod method = *parse_guard_method(method_name);
      if (!backend_name.empty()) cfg.backend = *parse_backend_kind(backend_name);
      if (!mock_mode_name.empty()) cfg.mock_mode = *parse_mock_mode(mock_mode_name);
      if (method == GuardMethod::PureLLM && cfg.backend == BackendKind::Deterministic)
        throw UsageError("--method purellm needs --backend mock or http");
      Runtime rt = Runtime::build(cfg);
      auto g = rt.guard(method);
      auto corpus = load_corpus(in_path);
      std::string body;
      Json failures = Json::array();
      for (const auto& item : corpus) {
        try {
          body += Json(g->guard(item.injected_text, item.base.id)).dump();
          body += '\n';
        } catch (const Error& e) {
          failures.push_back({{"id", item.base.id}, {"code", e.code()}});
        }
      }
      if (!failures.empty()) {
        // fail closed: no partial output, only the manifest
        std::remove(out_path.c_str());
        std::string manifest = out_path + ".errors.json";
        write_file(manifest, Json{{"method", method_name}, {"failed", failures}}.dump(2) + "\n");
        err << "error: guard failed on " << failures.size() << " item(s); see " << manifest << "\n";
        return kExitRuntime;
      }
      write_file(out_path, body);
      out << corpus.size() << "\n";
      return kExitOk;
    }

    if (*eval) {
      Runtime rt = Runtime::build(AppConfig(cfg));
      TemplateLibrary lib = TemplateLibrary::load(cfg.data_path(cfg.templates, "problem_templates.json"));
      EvalInputs in;
      in.reconstructor = rt.reconstructor.get();
      in.templates = &lib;
      in.weights = weights_path.empty() ? cfg.weights : CompositeWeights::load(weights_path);
      in.config_sha256 = cfg.sha256();
      auto pred = load_outputs(pred_path);
      auto gold = load_corpus(gold_path);
      MetricsReport report = evaluate_outputs(pred, gold, in);
      write_file(out_path, Json(report).dump(2) + "\n");
      out << format_table({report});
      if (report.method == "srpg" && report.asr > 0.0) {
        err << "error: srpg leaked on " << report.asr * static_cast<double>(report.items) << " item(s)\n";
        return kExitRuntime;
      }
      return kExitOk;
    }

    if (*serve) {
      if (!listen.empty()) cfg.gateway.listen = listen;
      if (!upstream.empty()) cfg.gateway.upstream = upstream;
      auto [host, port] = parse_listen(cfg.gateway.listen);
      Gateway gw(Runtime::build(cfg));
      int bound = gw.bind(host, port);
      out << "listening on " << host << ":" << bound << std::endl;
      g_serving = &gw;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      gw.run();
      g_serving = nullptr;
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace srpg::cli
