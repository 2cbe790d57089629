// Synthetic tabla performances built from theka definitions, with seeded
// substitution/deletion/insertion corruption.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taal/core.h"

namespace taal {

struct PerformanceSpec {
  std::string tala;
  int cycles = 2;
  double tempo_bpm = 240.0;  // matras per minute
  int start_offset = 0;      // in [0, matra_count)
  bool gharana_variant = false;
};

/// `cycles` repetitions of the theka rotated by start_offset, onset i at
/// i * 60 / tempo_bpm. Throws std::invalid_argument on an unknown tala or an
/// invalid spec.
StrokeSequence generate_performance(const PerformanceSpec& spec);

struct NoiseSpec {
  double p_sub = 0.0;
  double p_del = 0.0;
  double p_ins = 0.0;
  std::vector<StrokeId> insertion_vocabulary;  // empty: union of builtin theka strokes
  std::uint64_t seed = 0;

  void validate() const;
};

/// Every distinct stroke appearing in a builtin theka, in vocabulary order.
std::vector<StrokeId> default_insertion_vocabulary();

struct CorruptionStats {
  int deleted = 0;
  int substituted = 0;
  int inserted = 0;
};

/// Per stroke: delete with p_del, otherwise substitute with p_sub by a
/// different uniformly drawn stroke; then after each original position insert
/// a random stroke with p_ins. Onsets of inserted strokes are placed halfway
/// to the next original onset.
StrokeSequence corrupt(const StrokeSequence& seq, const NoiseSpec& noise,
                       CorruptionStats* stats = nullptr);

}  // namespace taal
