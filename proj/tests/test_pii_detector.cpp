#include "doctest.h"
#include "srpg/error.hpp"
#include "srpg/pii_detector.hpp"
#include "srpg/text.hpp"
#include "support.hpp"

using namespace srpg;

namespace {

std::vector<PiiSpan> detect(const std::string& s, DetectionPolicy p = DetectionPolicy::strict()) {
  return detect_pii(s, *ts::gazetteer(), p);
}

// offsets of the first occurrence of `needle`, in scalars
std::pair<std::size_t, std::size_t> scalar_find(const std::string& hay, const std::string& needle) {
  auto b = hay.find(needle);
  REQUIRE(b != std::string::npos);
  return {text::scalar_length(hay.substr(0, b)), text::scalar_length(hay.substr(0, b)) + text::scalar_length(needle)};
}

}  // namespace

TEST_SUITE("pii_detector") {

TEST_CASE("location from the entanglement example") {
  std::string s = "I live in Haidian District";
  auto spans = detect(s);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].kind == PiiKind::Location);
  CHECK(spans[0].surface == "Haidian District");
  CHECK(spans[0].canonical == "haidian district");
  auto [b, e] = scalar_find(s, "Haidian District");
  CHECK(spans[0].start == b);
  CHECK(spans[0].end == e);
}

TEST_CASE("clean math has no detections under Standard") {
  CHECK(detect("x + 5 = 10", DetectionPolicy::standard()).empty());
  CHECK(detect("x + 5 = 10").empty());
}

TEST_CASE("phone number agrees with the digit-run oracle") {
  std::string s = "call me at 13800138000";
  auto runs = ts::digit_runs(s);
  REQUIRE(runs.size() == 1);
  auto spans = detect(s);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].kind == PiiKind::PhoneNumber);
  CHECK(spans[0].surface == runs[0]);
}

TEST_CASE("one fixture per pattern") {
  struct Case {
    std::string text, surface;
    PiiKind kind;
  };
  const std::vector<Case> cases{
      {"Text me on 555-867-5309 tonight", "555-867-5309", PiiKind::PhoneNumber},
      {"My email is jo.park@example.org ok", "jo.park@example.org", PiiKind::ContactOther},
      {"Follow @mathkid_99 for tips", "@mathkid_99", PiiKind::ContactOther},
      {"Ask Mrs. Hargrove about it", "Mrs. Hargrove", PiiKind::PersonName},
      {"My name is Tobias Lindqvist and I need help", "Tobias Lindqvist", PiiKind::PersonName},
      {"We moved to Quillfeather Road last year", "Quillfeather Road", PiiKind::Location},
      {"She studies at Brightwater Academy now", "Brightwater Academy", PiiKind::SchoolName},
      // 8 digits is also a phone candidate; equal spans go to PhoneNumber
      {"My student ID is 88123456", "88123456", PiiKind::PhoneNumber},
      {"Student ID 4471, room 12", "4471", PiiKind::IdNumber},
      {"Passport AB1234567 expired", "AB1234567", PiiKind::IdNumber},
  };
  for (const auto& c : cases) {
    CAPTURE(c.text);
    auto spans = detect(c.text);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].surface == c.surface);
    CHECK(spans[0].kind == c.kind);
  }
}

TEST_CASE("gazetteer hits ignore casing") {
  auto spans = detect("i live in HAIDIAN district");
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].kind == PiiKind::Location);
}

TEST_CASE("spans are sorted, disjoint and match their surfaces") {
  std::string s = "Hi, I'm Alice Chen from Riverside Middle School. Call 138-0013-8000 or mail a@b.co. Café at Haidian District.";
  auto spans = detect(s);
  CHECK(spans.size() >= 4);
  text::OffsetIndex idx(s);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    CHECK(spans[i].start < spans[i].end);
    if (i) CHECK(spans[i - 1].end <= spans[i].start);
    auto b = idx.to_byte(spans[i].start), e = idx.to_byte(spans[i].end);
    CHECK(s.substr(b, e - b) == spans[i].surface);
  }
}

TEST_CASE("overlap tie-break prefers the longest span") {
  // the school name contains a location-like word; the longer school span wins
  auto spans = detect("I go to Riverside Middle School.");
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].kind == PiiKind::SchoolName);
  CHECK(spans[0].surface == "Riverside Middle School");
}

TEST_CASE("ambiguous numbers") {
  auto strict = DetectionPolicy::strict();
  CHECK(classify_ambiguous_numeric("Room 50", 5, 7, strict) == NumericVerdict::PossiblePII);
  CHECK(classify_ambiguous_numeric("x + 50 = 10", 4, 6, strict) == NumericVerdict::MathQuantity);
  std::string s = "meet in Room 50 to solve x + 50";
  auto first = s.find("50"), second = s.rfind("50");
  CHECK(classify_ambiguous_numeric(s, first, first + 2, strict) == NumericVerdict::PossiblePII);
  CHECK(classify_ambiguous_numeric(s, second, second + 2, strict) == NumericVerdict::MathQuantity);
  CHECK_THROWS_AS(classify_ambiguous_numeric("Room 50", 0, 4, strict), ValidationError);
}

TEST_CASE("numbers with units stay math even near cues") {
  auto strict = DetectionPolicy::strict();
  std::string s = "Class trip: the bus drives 60 km.";
  auto at = s.find("60");
  CHECK(classify_ambiguous_numeric(s, at, at + 2, strict) == NumericVerdict::MathQuantity);
}

TEST_CASE("bundled gazetteer size") {
  for (PiiKind k : kAllPiiKinds) CHECK(ts::gazetteer()->size(k) >= 50);
}

TEST_CASE("gazetteer schema errors") {
  Json unknown = {{"FavoriteColor", Json::array({{{"canonical", "blue"}, {"aliases", {"Blue"}}}})}};
  CHECK_THROWS_AS(Gazetteer::from_json(unknown), SchemaError);
  Json empty_alias = {{"PersonName", Json::array({{{"canonical", "al"}, {"aliases", Json::array()}}})}};
  CHECK_THROWS_AS(Gazetteer::from_json(empty_alias), ValidationError);
  Json dup = {{"PersonName", Json::array({{{"canonical", "al"}, {"aliases", {"Al"}}},
                                          {{"canonical", "al"}, {"aliases", {"AL"}}}})}};
  CHECK_THROWS_AS(Gazetteer::from_json(dup), ValidationError);
  CHECK_THROWS_AS(Gazetteer::load(ts::temp_path("missing-gazetteer.json")), IoError);
}

TEST_CASE("detector recovers every injected span exactly") {
  auto corpus = ts::corpus(7, 600);
  std::size_t records = 0;
  for (const auto& item : corpus) {
    auto spans = detect(item.injected_text);
    for (const auto& r : item.pii) {
      ++records;
      bool exact = std::any_of(spans.begin(), spans.end(),
                               [&](const PiiSpan& s) { return s.start == r.start && s.end == r.end; });
      CAPTURE(item.injected_text);
      CAPTURE(r.surface);
      CHECK(exact);
    }
  }
  CHECK(records >= corpus.size());
}

TEST_CASE("detection is deterministic") {
  auto corpus = ts::corpus(3, 50);
  for (const auto& item : corpus) CHECK(detect(item.injected_text) == detect(item.injected_text));
}

}  // TEST_SUITE
