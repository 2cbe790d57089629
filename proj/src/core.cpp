// Tala knowledge base.

#include "taal/core.h"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace taal {
namespace {

constexpr const char* kStandardStrokes[] = {
    "No-stroke", "Dha", "Dhin", "Tin", "Na",      "Ta",  "Tun",
    "Kat",       "Dhage", "Tirkita", "Dhi", "Ti",
};

Vocabulary make_standard() {
  Vocabulary v;
  for (const char* name : kStandardStrokes) v.intern(name);
  // Spellings used in printed thekas.
  v.add_alias("DhaGe", v.at("Dhage"));
  v.add_alias("Tirakita", v.at("Tirkita"));
  return v;
}

std::vector<StrokeId> ids(std::initializer_list<std::string_view> names) {
  const auto& v = Vocabulary::standard();
  std::vector<StrokeId> out;
  out.reserve(names.size());
  for (auto n : names) out.push_back(v.at(n));
  return out;
}

TalaDefinition make_tala(std::string name, std::string display,
                         std::vector<int> vibhags,
                         std::initializer_list<std::string_view> theka,
                         std::initializer_list<std::string_view> vocab) {
  TalaDefinition t;
  t.name = std::move(name);
  t.display_name = std::move(display);
  t.vibhag_lengths = std::move(vibhags);
  t.theka = ids(theka);
  t.matra_count = static_cast<int>(t.theka.size());
  t.stroke_vocabulary = ids(vocab);
  t.reference_ratio = stroke_histogram(t.theka, t.stroke_vocabulary).counts;
  return t;
}

std::vector<TalaDefinition> make_builtins() {
  std::vector<TalaDefinition> talas;

  auto tintal = make_tala("Tintal", "Tīntāl", {4, 4, 4, 4},
                          {"Dha", "Dhin", "Dhin", "Dha",  //
                           "Dha", "Dhin", "Dhin", "Dha",  //
                           "Dha", "Tin", "Tin", "Na",     //
                           "Na", "Dhin", "Dhin", "Dha"},
                          {"Dha", "Dhin", "Tin", "Na"});
  // Beats 12 and 13 are played "Ta" in some gharanas.
  const auto& v = Vocabulary::standard();
  tintal.gharana_variant = {{11, v.at("Ta")}, {12, v.at("Ta")}};
  tintal.equivalents = {{v.at("Ta"), v.at("Na")}};
  talas.push_back(std::move(tintal));

  talas.push_back(make_tala("Ektal", "Ektāl", {2, 2, 2, 2, 2, 2},
                            {"Dhin", "Dhin", "Dhage", "Tirkita", "Tun", "Na",
                             "Kat", "Ta", "Dhage", "Tirkita", "Dhin", "Na"},
                            {"Dhin", "Tun", "Na", "Kat", "Ta", "Dhage",
                             "Tirkita"}));

  talas.push_back(make_tala("Jhaptal", "Jhaptāl", {2, 3, 2, 3},
                            {"Dhi", "Na", "Dhi", "Dhi", "Na", "Ti", "Na",
                             "Dhi", "Dhi", "Na"},
                            {"Dhi", "Na", "Ti"}));

  talas.push_back(make_tala("Rupak", "Rūpak", {3, 2, 2},
                            {"Tin", "Tin", "Na", "Dhi", "Na", "Dhi", "Na"},
                            {"Tin", "Na", "Dhi"}));

  for (const auto& t : talas) t.validate();
  return talas;
}

}  // namespace

const Vocabulary& Vocabulary::standard() {
  static const Vocabulary kStandard = make_standard();
  return kStandard;
}

StrokeId Vocabulary::intern(std::string_view name) {
  if (auto id = find(name)) return *id;
  if (name.empty() ||
      std::any_of(name.begin(), name.end(),
                  [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; })) {
    throw std::invalid_argument("invalid stroke name '" + std::string(name) + "'");
  }
  if (labels_.size() >= 0xFFFF) throw std::length_error("vocabulary is full");
  StrokeId id{static_cast<std::uint16_t>(labels_.size())};
  labels_.push_back({id, std::string(name)});
  index_.emplace(std::string(name), id);
  return id;
}

std::optional<StrokeId> Vocabulary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StrokeId Vocabulary::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw std::out_of_range("unknown stroke '" + std::string(name) + "'");
}

const std::string& Vocabulary::name(StrokeId id) const {
  return labels_.at(id.value).name;
}

void Vocabulary::add_alias(std::string_view alias, StrokeId id) {
  if (id.value >= labels_.size()) throw std::out_of_range("alias target out of range");
  auto [it, inserted] = index_.emplace(std::string(alias), id);
  if (!inserted && it->second != id) {
    throw std::invalid_argument("alias '" + std::string(alias) + "' already bound");
  }
}

void StrokeSequence::validate() const {
  if (onset_times.empty()) return;
  if (onset_times.size() != strokes.size()) {
    throw std::invalid_argument("onset_times length does not match strokes");
  }
  for (std::size_t i = 0; i < onset_times.size(); ++i) {
    if (!(onset_times[i] >= 0.0)) throw std::invalid_argument("negative onset time");
    if (i > 0 && !(onset_times[i] > onset_times[i - 1])) {
      throw std::invalid_argument("onset_times not strictly increasing");
    }
  }
}

StrokeId TalaDefinition::canonical(StrokeId s) const {
  for (const auto& [variant, canon] : equivalents) {
    if (variant == s) return canon;
  }
  return s;
}

std::vector<StrokeId> TalaDefinition::variant_theka() const {
  auto out = theka;
  for (const auto& [pos, stroke] : gharana_variant) out.at(pos) = stroke;
  return out;
}

void TalaDefinition::validate() const {
  auto fail = [this](const std::string& what) {
    throw std::logic_error("tala " + name + ": " + what);
  };
  if (matra_count <= 0) fail("matra_count must be positive");
  int sum = 0;
  for (int len : vibhag_lengths) {
    if (len <= 0) fail("vibhag lengths must be positive");
    sum += len;
  }
  if (sum != matra_count) fail("vibhag lengths do not sum to matra_count");
  if (static_cast<int>(theka.size()) != matra_count) fail("theka length != matra_count");
  for (auto s : theka) {
    if (s == kNoStroke) fail("No-stroke inside theka");
    if (std::find(stroke_vocabulary.begin(), stroke_vocabulary.end(), s) ==
        stroke_vocabulary.end()) {
      fail("theka stroke missing from vocabulary");
    }
  }
  auto hist = stroke_histogram(theka, stroke_vocabulary);
  if (hist.counts != reference_ratio) fail("reference_ratio != theka histogram");
  for (int r : reference_ratio) {
    if (r <= 0) fail("reference_ratio entries must be positive");
  }
}

const std::vector<TalaDefinition>& builtin_talas() {
  static const std::vector<TalaDefinition> kTalas = make_builtins();
  return kTalas;
}

const TalaDefinition* find_tala(std::string_view name) {
  for (const auto& t : builtin_talas()) {
    if (t.name == name || t.display_name == name) return &t;
  }
  return nullptr;
}

StrokeHistogram stroke_histogram(std::span<const StrokeId> strokes,
                                 std::span<const StrokeId> vocab) {
  StrokeHistogram h;
  h.counts.assign(vocab.size(), 0);
  for (auto s : strokes) {
    auto it = std::find(vocab.begin(), vocab.end(), s);
    if (it == vocab.end()) {
      ++h.out_of_vocabulary;
    } else {
      ++h.counts[static_cast<std::size_t>(it - vocab.begin())];
    }
  }
  return h;
}

std::vector<StrokeId> apply_equivalents(std::span<const StrokeId> strokes,
                                        const TalaDefinition& tala) {
  std::vector<StrokeId> out(strokes.begin(), strokes.end());
  if (tala.equivalents.empty()) return out;
  for (auto& s : out) s = tala.canonical(s);
  return out;
}

std::string talas_to_json(const std::vector<TalaDefinition>& talas,
                          const Vocabulary& vocab) {
  auto names = [&vocab](const std::vector<StrokeId>& seq) {
    std::vector<std::string> out;
    out.reserve(seq.size());
    for (auto s : seq) out.push_back(vocab.name(s));
    return out;
  };
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& t : talas) {
    nlohmann::ordered_json j;
    j["name"] = t.name;
    j["display_name"] = t.display_name;
    j["matra_count"] = t.matra_count;
    j["vibhag_lengths"] = t.vibhag_lengths;
    j["theka"] = names(t.theka);
    j["vocabulary"] = names(t.stroke_vocabulary);
    j["ratio"] = t.reference_ratio;
    nlohmann::ordered_json eq = nlohmann::ordered_json::object();
    for (const auto& [variant, canon] : t.equivalents) {
      eq[vocab.name(variant)] = vocab.name(canon);
    }
    j["equivalents"] = eq;
    doc.push_back(std::move(j));
  }
  return doc.dump(2);
}

}  // namespace taal
