#include "taal/ratio_score.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace taal {

double cosine_similarity(std::span<const double> reference, std::span<const double> test) {
  if (reference.size() != test.size()) throw std::invalid_argument("dimension mismatch");
  double dot = 0.0, rr = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    dot += reference[i] * test[i];
    rr += reference[i] * reference[i];
    tt += test[i] * test[i];
  }
  if (rr == 0.0) throw std::invalid_argument("reference vector is all zero");
  if (tt == 0.0) return 0.0;
  // Rounding can push parallel vectors just past 1.
  return std::clamp(dot / (std::sqrt(rr) * std::sqrt(tt)), -1.0, 1.0);
}

Ranking identify_tala_ratio(std::span<const StrokeId> strokes,
                            const std::vector<TalaDefinition>& talas,
                            const IdentifyOptions& options) {
  if (strokes.empty()) throw std::invalid_argument("empty sequence");
  if (talas.empty()) throw std::invalid_argument("no talas to rank");

  Ranking ranking;
  ranking.method = "ratio";
  std::vector<double> ref, test;
  for (const auto& tala : talas) {
    auto hist = options.gharana_equivalence
                    ? stroke_histogram(apply_equivalents(strokes, tala), tala.stroke_vocabulary)
                    : stroke_histogram(strokes, tala.stroke_vocabulary);
    ref.assign(tala.reference_ratio.begin(), tala.reference_ratio.end());
    test.assign(hist.counts.begin(), hist.counts.end());

    RankedTala entry;
    entry.tala = tala.name;
    entry.matra_count = tala.matra_count;
    entry.score = cosine_similarity(ref, test);
    entry.coverage = static_cast<double>(strokes.size() - hist.out_of_vocabulary) /
                     static_cast<double>(strokes.size());
    entry.normalized = entry.score * entry.coverage;
    ranking.entries.push_back(std::move(entry));
  }
  sort_ranking(ranking.entries);
  ranking.low_confidence = ranking.top().normalized <= 0.0;
  return ranking;
}

}  // namespace taal
