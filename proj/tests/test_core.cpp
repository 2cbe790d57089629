#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.h"
#include "taal/core.h"
#include "taal/stroke_io.h"

using namespace taal;
using oracle::strokes;

namespace {

std::vector<int> counts_over(const TalaDefinition& t, std::initializer_list<std::string_view> vocab) {
  return stroke_histogram(t.theka, strokes(vocab)).counts;
}

}  // namespace

TEST_CASE("builtin talas have the documented structure") {
  const auto& talas = builtin_talas();
  REQUIRE(talas.size() == 4);

  CHECK(talas[0].name == "Tintal");
  CHECK(talas[0].matra_count == 16);
  CHECK(talas[0].vibhag_lengths == std::vector<int>{4, 4, 4, 4});
  CHECK(talas[1].name == "Ektal");
  CHECK(talas[1].matra_count == 12);
  CHECK(talas[1].vibhag_lengths == std::vector<int>{2, 2, 2, 2, 2, 2});
  CHECK(talas[2].name == "Jhaptal");
  CHECK(talas[2].matra_count == 10);
  CHECK(talas[2].vibhag_lengths == std::vector<int>{2, 3, 2, 3});
  CHECK(talas[3].name == "Rupak");
  CHECK(talas[3].matra_count == 7);
  CHECK(talas[3].vibhag_lengths == std::vector<int>{3, 2, 2});

  for (const auto& t : talas) {
    CHECK_NOTHROW(t.validate());
    int sum = 0;
    for (int v : t.vibhag_lengths) sum += v;
    CHECK(sum == t.matra_count);
    int ratio_sum = 0;
    for (int r : t.reference_ratio) ratio_sum += r;
    CHECK(ratio_sum == t.matra_count);
    CHECK(stroke_histogram(t.theka, t.stroke_vocabulary).counts == t.reference_ratio);
    CHECK(std::find(t.theka.begin(), t.theka.end(), kNoStroke) == t.theka.end());
  }
}

TEST_CASE("reference ratios match the published beat proportions") {
  const auto& t = builtin_talas();
  // Tintal [Dha,Dhin,Tin,Na] = 2 x [3,3,1,1].
  CHECK(t[0].reference_ratio == std::vector<int>{6, 6, 2, 2});
  CHECK(t[1].reference_ratio == std::vector<int>{3, 1, 2, 1, 1, 2, 2});
  CHECK(t[2].reference_ratio == std::vector<int>{5, 4, 1});
  CHECK(t[3].reference_ratio == std::vector<int>{2, 3, 2});

  CHECK(t[1].stroke_vocabulary == strokes({"Dhin", "Tun", "Na", "Kat", "Ta", "Dhage", "Tirkita"}));
  CHECK(counts_over(t[3], {"Tin", "Na", "Dhi"}) == std::vector<int>{2, 3, 2});
}

TEST_CASE("theka transcriptions") {
  const auto& t = builtin_talas();
  CHECK(t[0].theka == strokes({"Dha", "Dhin", "Dhin", "Dha", "Dha", "Dhin", "Dhin", "Dha", "Dha",
                               "Tin", "Tin", "Na", "Na", "Dhin", "Dhin", "Dha"}));
  CHECK(t[3].theka == strokes({"Tin", "Tin", "Na", "Dhi", "Na", "Dhi", "Na"}));
  CHECK(t[2].theka == strokes({"Dhi", "Na", "Dhi", "Dhi", "Na", "Ti", "Na", "Dhi", "Dhi", "Na"}));
  CHECK(t[1].theka == strokes({"Dhin", "Dhin", "Dhage", "Tirkita", "Tun", "Na", "Kat", "Ta",
                               "Dhage", "Tirkita", "Dhin", "Na"}));
}

TEST_CASE("Tintal gharana variant swaps Na for Ta at beats 12 and 13") {
  const auto& tintal = builtin_talas()[0];
  auto variant = tintal.variant_theka();
  CHECK(variant[11] == Vocabulary::standard().at("Ta"));
  CHECK(variant[12] == Vocabulary::standard().at("Ta"));
  CHECK(apply_equivalents(variant, tintal) == tintal.theka);
  // The ratio is unchanged once Ta is read as Na.
  CHECK(stroke_histogram(apply_equivalents(variant, tintal), tintal.stroke_vocabulary).counts ==
        tintal.reference_ratio);
  // Ektal has no equivalences: Ta stays Ta there.
  const auto& ektal = builtin_talas()[1];
  auto ta = strokes({"Ta"});
  CHECK(apply_equivalents(ta, ektal) == ta);
}

TEST_CASE("stroke_histogram") {
  const auto& tintal = builtin_talas()[0];
  SUBCASE("one Tintal cycle over its own vocabulary") {
    auto h = stroke_histogram(tintal.theka, strokes({"Dha", "Dhin", "Tin", "Na"}));
    CHECK(h.counts == std::vector<int>{6, 6, 2, 2});
    CHECK(h.out_of_vocabulary == 0);
  }
  SUBCASE("empty sequence") {
    auto h = stroke_histogram({}, strokes({"Dha", "Dhin", "Tin", "Na"}));
    CHECK(h.counts == std::vector<int>{0, 0, 0, 0});
    CHECK(h.out_of_vocabulary == 0);
  }
  SUBCASE("Tintal counted against the Jhaptal vocabulary") {
    // Tin and Ti are different bols, so only the two Na strokes land in vocabulary.
    auto h = stroke_histogram(tintal.theka, strokes({"Dhi", "Na", "Ti"}));
    CHECK(h.counts == std::vector<int>{0, 2, 0});
    CHECK(h.out_of_vocabulary == 14);
  }
}

TEST_CASE("vocabulary") {
  const auto& v = Vocabulary::standard();
  CHECK(v.name(kNoStroke) == "No-stroke");
  CHECK(v.find("DhaGe") == v.find("Dhage"));
  CHECK(v.find("Tirakita") == v.find("Tirkita"));
  CHECK_FALSE(v.find("dha").has_value());  // case-sensitive
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v.labels()[i].id.value == i);
    CHECK(v.at(v.labels()[i].name).value == i);
  }
  Vocabulary copy = v;
  auto id = copy.intern("Ghe");
  CHECK(id.value == v.size());
  CHECK(copy.intern("Ghe") == id);
  CHECK_THROWS_AS(copy.intern("two words"), std::invalid_argument);
  CHECK_THROWS_AS(v.at("Ghe"), std::out_of_range);
}

TEST_CASE("StrokeSequence onset invariants") {
  StrokeSequence s;
  s.strokes = strokes({"Dha", "Dhin"});
  CHECK_NOTHROW(s.validate());
  s.onset_times = {0.0, 0.25};
  CHECK_NOTHROW(s.validate());
  s.onset_times = {0.25, 0.25};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.onset_times = {0.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("tala JSON export") {
  auto doc = nlohmann::json::parse(talas_to_json(builtin_talas()));
  REQUIRE(doc.size() == 4);
  CHECK(doc[2]["name"] == "Jhaptal");
  CHECK(doc[2]["matra_count"] == 10);
  CHECK(doc[2]["vibhag_lengths"] == nlohmann::json({2, 3, 2, 3}));
  CHECK(doc[2]["vocabulary"] == nlohmann::json({"Dhi", "Na", "Ti"}));
  CHECK(doc[2]["ratio"] == nlohmann::json({5, 4, 1}));
  CHECK(doc[0]["theka"].size() == 16);
  CHECK(doc[0]["equivalents"]["Ta"] == "Na");
}

TEST_CASE("stroke text parsing") {
  auto parsed = parse_stroke_text(
      "# Ektal, one cycle\n"
      "Dhin Dhin DhaGe Tirakita\n"
      "  # indented comment\n"
      "Tun\tNa Kat Ta Foo Dhage Tirkita Foo\n"
      "\n"
      "Dhin Na\n");
  CHECK(parsed.sequence.size() == 14);
  CHECK(parsed.unknown_tokens == std::vector<std::string>{"Foo"});
  CHECK(parsed.unknown_count == 2);
  CHECK(parsed.sequence.strokes[2] == Vocabulary::standard().at("Dhage"));
  CHECK(parsed.vocabulary.name(parsed.sequence.strokes[8]) == "Foo");

  std::ostringstream out;
  write_stroke_text(out, parsed.sequence, parsed.vocabulary, 7, {"round trip"});
  auto again = parse_stroke_text(out.str());
  CHECK(again.sequence.strokes == parsed.sequence.strokes);
  CHECK(out.str().rfind("# round trip\n", 0) == 0);
}

TEST_CASE("builtin_talas is deterministic") {
  CHECK(&builtin_talas() == &builtin_talas());
  CHECK(talas_to_json(builtin_talas()) == talas_to_json(builtin_talas()));
  CHECK(find_tala("Jhaptāl") == &builtin_talas()[2]);
  CHECK(find_tala("Dadra") == nullptr);
}
