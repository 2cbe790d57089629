// Tala knowledge base and stroke-symbol domain model.

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace taal {

/// Identifier of a stroke (bol) within a Vocabulary.
struct StrokeId {
  std::uint16_t value = 0;

  friend constexpr auto operator<=>(StrokeId, StrokeId) = default;
};

struct StrokeLabel {
  StrokeId id;
  std::string name;
};

/// Ordered, append-only table of stroke names. Names are case-sensitive and
/// contain no whitespace. The standard vocabulary holds every stroke used by
/// the builtin thekas plus the reserved "No-stroke" label; callers that parse
/// free text extend a copy with out-of-vocabulary tokens.
class Vocabulary {
 public:
  static const Vocabulary& standard();

  StrokeId intern(std::string_view name);
  std::optional<StrokeId> find(std::string_view name) const;
  StrokeId at(std::string_view name) const;  // throws std::out_of_range
  const std::string& name(StrokeId id) const;

  /// Alternate spellings resolved by find(), e.g. "DhaGe" -> "Dhage".
  void add_alias(std::string_view alias, StrokeId id);

  std::size_t size() const { return labels_.size(); }
  const std::vector<StrokeLabel>& labels() const { return labels_; }

 private:
  std::vector<StrokeLabel> labels_;
  std::unordered_map<std::string, StrokeId> index_;
};

inline constexpr std::string_view kNoStrokeName = "No-stroke";
/// The reserved "No-stroke" label is id 0 in the standard vocabulary.
inline constexpr StrokeId kNoStroke{0};

/// Ordered stroke list with optional per-stroke onset times in seconds.
struct StrokeSequence {
  std::vector<StrokeId> strokes;
  std::vector<double> onset_times;  // empty, or strictly increasing and size-matched

  std::size_t size() const { return strokes.size(); }
  bool empty() const { return strokes.empty(); }
  bool has_onsets() const { return !onset_times.empty(); }

  /// Throws std::invalid_argument if onset_times violate the invariants.
  void validate() const;
};

struct TalaDefinition {
  std::string name;
  std::string display_name;
  int matra_count = 0;
  std::vector<int> vibhag_lengths;
  std::vector<StrokeId> theka;
  std::vector<StrokeId> stroke_vocabulary;
  std::vector<int> reference_ratio;
  /// Gharana rendering: thekā positions (0-based) replaced by a variant bol.
  std::vector<std::pair<int, StrokeId>> gharana_variant;
  /// Variant -> canonical stroke substitutions applied at identification time.
  std::vector<std::pair<StrokeId, StrokeId>> equivalents;

  StrokeId canonical(StrokeId s) const;
  std::vector<StrokeId> variant_theka() const;

  /// Throws std::logic_error naming the violated invariant.
  void validate() const;
};

/// The four talas in the knowledge base: Tintal, Ektal, Jhaptal, Rupak.
/// Ids refer to Vocabulary::standard().
const std::vector<TalaDefinition>& builtin_talas();

/// Lookup by name (ASCII or display form). Returns nullptr if unknown.
const TalaDefinition* find_tala(std::string_view name);

struct StrokeHistogram {
  std::vector<int> counts;  // aligned with the vocabulary argument
  int out_of_vocabulary = 0;
};

StrokeHistogram stroke_histogram(std::span<const StrokeId> strokes,
                                 std::span<const StrokeId> vocab);

/// Copies `strokes` with the tala's equivalence map applied.
std::vector<StrokeId> apply_equivalents(std::span<const StrokeId> strokes,
                                        const TalaDefinition& tala);

/// JSON array describing the given talas (names resolved via `vocab`).
std::string talas_to_json(const std::vector<TalaDefinition>& talas,
                          const Vocabulary& vocab = Vocabulary::standard());

}  // namespace taal
