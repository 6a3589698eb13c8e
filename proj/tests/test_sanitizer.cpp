#include "doctest.h"
#include "srpg/sanitizer.hpp"
#include "srpg/text.hpp"
#include "support.hpp"

using namespace srpg;

TEST_SUITE("sanitizer") {

TEST_CASE("names and room numbers masked, math kept") {
  auto m = strict_mask("My name is Alice Chen. x + 50 = 10 in Room 50.", *ts::gazetteer());
  CHECK(m.text == "My name is [MASK]. x + 50 = 10 in Room [MASK].");
  REQUIRE(m.replacements.size() == 2);
  CHECK(m.replacements[0].original == "Alice Chen");
  CHECK(m.replacements[0].kind == PiiKind::PersonName);
  CHECK(m.replacements[1].original == "50");
  CHECK_FALSE(m.replacements[1].kind.has_value());
}

TEST_CASE("clean math is unchanged") {
  auto m = strict_mask("solve 2y = 8", *ts::gazetteer());
  CHECK(m.text == "solve 2y = 8");
  CHECK(m.replacements.empty());
}

TEST_CASE("replacement offsets point at placeholders") {
  std::string s = "Hi, I'm Alice Chen from Haidian District, call 138-0013-8000. Café 5 + 3 = 8.";
  auto m = strict_mask(s, *ts::gazetteer());
  text::OffsetIndex src(s), out(m.text);
  for (const auto& r : m.replacements) {
    auto b = src.to_byte(r.start), e = src.to_byte(r.end);
    CHECK(s.substr(b, e - b) == r.original);
    auto mb = out.to_byte(r.masked_start), me = out.to_byte(r.masked_end);
    CHECK(m.text.substr(mb, me - mb) == "[MASK]");
  }
}

TEST_CASE("masking is idempotent and detection-clean") {
  auto corpus = ts::corpus(21, 200);
  for (const auto& item : corpus) {
    auto once = strict_mask(item.injected_text, *ts::gazetteer());
    auto twice = strict_mask(once.text, *ts::gazetteer());
    CHECK(twice.text == once.text);
    CHECK(twice.replacements.empty());
    CHECK(detect_pii(once.text, *ts::gazetteer(), DetectionPolicy::strict()).empty());
  }
}

TEST_CASE("verify_no_leak examples") {
  PiiRecord name{PiiKind::PersonName, "alice chen", {"Alice Chen", "Alice"}, 0, 10, "Alice Chen"};
  PiiRecord phone{PiiKind::PhoneNumber, "13800138000", {"138-0013-8000"}, 0, 13, "138-0013-8000"};
  MaskedText clean{"[MASK] asks about x + 5 = 10", {}};
  CHECK(verify_no_leak(clean, {name, phone}));
  MaskedText cased{"hello alice chen", {}};
  CHECK_FALSE(verify_no_leak(cased, {name}));
  MaskedText spaced{"reach 138 0013 8000", {}};
  CHECK_FALSE(verify_no_leak(spaced, {phone}));
}

TEST_CASE("leak-freedom over 1000 seeds") {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    auto item = ts::corpus(seed, 1).front();
    auto m = strict_mask(item.injected_text, *ts::gazetteer());
    CAPTURE(item.injected_text);
    CHECK(verify_no_leak(m, item.pii));
  }
}

}  // TEST_SUITE
