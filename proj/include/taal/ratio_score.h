// Stroke-ratio identification: cosine similarity between a sequence's stroke
// histogram and each tala's reference ratio.

#pragma once

#include <span>
#include <vector>

#include "taal/alignment.h"
#include "taal/core.h"

namespace taal {

/// R.T / (|R||T|). Returns 0 when T is all zero. Throws std::invalid_argument
/// on a dimension mismatch or an all-zero R.
double cosine_similarity(std::span<const double> reference, std::span<const double> test);

/// Ranks talas by cosine(reference_ratio, histogram) x coverage, where
/// coverage is the in-vocabulary fraction of the strokes. `score` holds the
/// raw cosine. Throws std::invalid_argument("empty sequence") on empty input.
Ranking identify_tala_ratio(std::span<const StrokeId> strokes,
                            const std::vector<TalaDefinition>& talas,
                            const IdentifyOptions& options = {});

}  // namespace taal
