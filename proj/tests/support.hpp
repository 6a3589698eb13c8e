#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "srpg/config.hpp"
#include "srpg/corpus.hpp"
#include "srpg/pii_detector.hpp"
#include "srpg/reconstructor.hpp"

namespace ts {

inline std::string data(const std::string& rel) { return std::string(SRPG_DEFAULT_DATA_DIR) + "/" + rel; }
inline std::string fixture(const std::string& rel) { return std::string(SRPG_FIXTURE_DIR) + "/" + rel; }

inline std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("srpg_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void spit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
}

inline std::shared_ptr<const srpg::Gazetteer> gazetteer() {
  static auto g = std::make_shared<const srpg::Gazetteer>(srpg::Gazetteer::load(data("gazetteer.json")));
  return g;
}

inline std::shared_ptr<const srpg::ContextReconstructor> reconstructor() {
  static auto r = std::make_shared<const srpg::ContextReconstructor>(gazetteer());
  return r;
}

inline const srpg::TemplateLibrary& templates() {
  static auto t = srpg::TemplateLibrary::load(data("problem_templates.json"));
  return t;
}

inline const std::vector<srpg::PiiProfile>& profiles() {
  static auto p = srpg::load_profiles(data("profiles.json"));
  return p;
}

inline const srpg::InjectionBank& bank() {
  static auto b = srpg::InjectionBank::load(data("injection_templates.json"));
  return b;
}

inline std::vector<srpg::InjectedItem> corpus(std::uint64_t seed, std::size_t count,
                                               std::optional<srpg::InjectionStyle> style = std::nullopt) {
  auto items = srpg::generate_synthetic(seed, count, templates());
  return srpg::inject_corpus(items, profiles(), seed, bank(), *gazetteer(), style);
}

inline srpg::Runtime runtime(srpg::BackendKind backend = srpg::BackendKind::Deterministic,
                             srpg::MockMode mode = srpg::MockMode::Faithful) {
  srpg::AppConfig cfg;
  cfg.data_dir = SRPG_DEFAULT_DATA_DIR;
  cfg.backend = backend;
  cfg.mock_mode = mode;
  return srpg::Runtime::build(cfg);
}

// Random well-formed context for property tests.
inline srpg::MathContext random_context(std::mt19937_64& rng) {
  auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
  static const std::vector<std::string> vars{"x", "y", "n", "Triangle ABC", "Circle O", "speed", "t_1"};
  static const std::vector<std::string> values{"0", "5", "12", "0.25", "3.5", "-4", "100", "7.125", "60"};
  static const std::vector<std::string> units{"", "km", "cm", "$", "%", "kg", "min"};
  static const std::vector<std::string> labels{"", "apples", "Side AB", "Angle C", "red", "boys"};
  static const std::vector<std::string> rels{"x + 5 = 10", "2 * y - 1 = 7", "n > 4", "boys / girls = 2 / 3",
                                             "km / hour", "total = 3 * groups", "a < b + 1"};
  static const std::vector<std::string> targets{"", "find the area", "how many apples are left",
                                                "what is x"};
  srpg::MathContext c;
  for (int i = 0, n = static_cast<int>(rng() % 3); i < n; ++i) c.variables.push_back(pick(vars));
  for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) {
    srpg::Quantity q;
    q.value = pick(values);
    if (auto u = pick(units); !u.empty()) q.unit = u;
    if (auto l = pick(labels); !l.empty()) q.label = l;
    c.quantities.push_back(q);
  }
  for (int i = 0, n = static_cast<int>(rng() % 3); i < n; ++i)
    c.relations.push_back({srpg::infer_relation_kind(pick(rels)), pick(rels)});
  for (auto& r : c.relations) r.kind = srpg::infer_relation_kind(r.expression);
  if (auto t = pick(targets); !t.empty()) c.target = t;
  return c;
}

// Independent oracle: every maximal run of 7+ ASCII digits.
inline std::vector<std::string> digit_runs(const std::string& s, std::size_t min_len = 7) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      cur += s[i];
    } else {
      if (cur.size() >= min_len) out.push_back(cur);
      cur.clear();
    }
  }
  return out;
}

}  // namespace ts
