#include "taal/alignment.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace taal {
namespace {

int substitution(StrokeId a, StrokeId b, const NwScoring& s) {
  return a == b ? s.match : s.mismatch;
}

void require_non_empty(std::span<const StrokeId> a, std::span<const StrokeId> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sequence");
}

std::vector<std::vector<StrokeId>> rotations(std::span<const StrokeId> theka) {
  std::vector<std::vector<StrokeId>> out;
  out.reserve(theka.size());
  for (std::size_t r = 0; r < theka.size(); ++r) {
    std::vector<StrokeId> rot(theka.size());
    std::rotate_copy(theka.begin(), theka.begin() + static_cast<std::ptrdiff_t>(r),
                     theka.end(), rot.begin());
    out.push_back(std::move(rot));
  }
  return out;
}

// Reused scratch rows so the sliding loop does not allocate per window.
int nw_score_rows(std::span<const StrokeId> ref, std::span<const StrokeId> test,
                  const NwScoring& s, std::vector<int>& prev, std::vector<int>& cur) {
  const std::size_t w = test.size();
  prev.resize(w + 1);
  cur.resize(w + 1);
  for (std::size_t j = 0; j <= w; ++j) prev[j] = static_cast<int>(j) * s.gap;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = static_cast<int>(i) * s.gap;
    const StrokeId x = ref[i - 1];
    for (std::size_t j = 1; j <= w; ++j) {
      int diag = prev[j - 1] + substitution(x, test[j - 1], s);
      int up = prev[j] + s.gap;
      int left = cur[j - 1] + s.gap;
      cur[j] = std::max({diag, up, left});
    }
    std::swap(prev, cur);
  }
  return prev[w];
}

}  // namespace

ScoreMatrix nw_matrix(std::span<const StrokeId> reference, std::span<const StrokeId> test,
                      const NwScoring& s) {
  require_non_empty(reference, test);
  ScoreMatrix S(reference.size(), test.size());
  for (std::size_t i = 1; i <= reference.size(); ++i) S(i, 0) = S(i - 1, 0) + s.gap;
  for (std::size_t j = 1; j <= test.size(); ++j) S(0, j) = S(0, j - 1) + s.gap;
  for (std::size_t i = 1; i <= reference.size(); ++i) {
    for (std::size_t j = 1; j <= test.size(); ++j) {
      S(i, j) = std::max({S(i - 1, j - 1) + substitution(reference[i - 1], test[j - 1], s),
                          S(i - 1, j) + s.gap, S(i, j - 1) + s.gap});
    }
  }
  return S;
}

AlignmentPath nw_backtrack(const ScoreMatrix& S, std::span<const StrokeId> reference,
                           std::span<const StrokeId> test, const NwScoring& s) {
  if (S.rows() != reference.size() || S.cols() != test.size()) {
    throw std::invalid_argument("matrix does not match sequences");
  }
  AlignmentPath path;
  std::size_t i = S.rows();
  std::size_t j = S.cols();
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      int sub = substitution(reference[i - 1], test[j - 1], s);
      if (S(i, j) == S(i - 1, j - 1) + sub) {
        path.ops.push_back(sub == s.match ? AlignOp::kMatch : AlignOp::kMismatch);
        path.score += sub;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && S(i, j) == S(i - 1, j) + s.gap) {
      path.ops.push_back(AlignOp::kGapInTest);
      path.score += s.gap;
      --i;
    } else {
      path.ops.push_back(AlignOp::kGapInReference);
      path.score += s.gap;
      --j;
    }
  }
  std::reverse(path.ops.begin(), path.ops.end());
  return path;
}

int nw_score(std::span<const StrokeId> reference, std::span<const StrokeId> test,
             const NwScoring& scoring) {
  require_non_empty(reference, test);
  std::vector<int> prev, cur;
  return nw_score_rows(reference, test, scoring, prev, cur);
}

MatchResult sliding_match_score(std::span<const StrokeId> transcribed,
                                const TalaDefinition& tala,
                                const IdentifyOptions& options) {
  if (transcribed.empty() || tala.theka.empty()) throw std::invalid_argument("empty sequence");

  std::vector<StrokeId> mapped;
  if (options.gharana_equivalence) {
    mapped = apply_equivalents(transcribed, tala);
    transcribed = mapped;
  }

  const auto refs = rotations(tala.theka);
  std::vector<int> prev, cur;
  auto best_rotation = [&](std::span<const StrokeId> window) {
    int best = std::numeric_limits<int>::min();
    for (const auto& ref : refs) {
      best = std::max(best, nw_score_rows(ref, window, options.scoring, prev, cur));
    }
    return best;
  };

  const std::size_t m = tala.theka.size();
  const std::size_t n = transcribed.size();
  MatchResult result;
  if (n < m) {
    result.short_input = true;
    result.per_window_max.push_back(best_rotation(transcribed));
  } else {
    const std::size_t offsets = n - m + 1;
    for (std::size_t block = 0; block * m < offsets; ++block) {
      int block_max = std::numeric_limits<int>::min();
      const std::size_t end = std::min(offsets, (block + 1) * m);
      for (std::size_t o = block * m; o < end; ++o) {
        block_max = std::max(block_max, best_rotation(transcribed.subspan(o, m)));
      }
      result.per_window_max.push_back(block_max);
    }
  }
  result.window_count = static_cast<int>(result.per_window_max.size());
  result.sigma_nw =
      std::accumulate(result.per_window_max.begin(), result.per_window_max.end(), 0.0) /
      result.window_count;
  return result;
}

void sort_ranking(std::vector<RankedTala>& entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const RankedTala& a, const RankedTala& b) {
                     if (a.normalized != b.normalized) return a.normalized > b.normalized;
                     if (a.matra_count != b.matra_count) return a.matra_count < b.matra_count;
                     return a.tala < b.tala;
                   });
}

Ranking identify_tala_nw(std::span<const StrokeId> transcribed,
                         const std::vector<TalaDefinition>& talas,
                         const IdentifyOptions& options) {
  if (talas.empty()) throw std::invalid_argument("no talas to rank");
  Ranking ranking;
  ranking.method = "nw";
  for (const auto& tala : talas) {
    auto match = sliding_match_score(transcribed, tala, options);
    ranking.short_input = ranking.short_input || match.short_input;
    RankedTala entry;
    entry.tala = tala.name;
    entry.matra_count = tala.matra_count;
    entry.score = match.sigma_nw;
    entry.normalized = match.sigma_nw / tala.matra_count;
    ranking.entries.push_back(std::move(entry));
  }
  sort_ranking(ranking.entries);
  ranking.low_confidence = ranking.top().normalized < 0.0;
  return ranking;
}

int lcs_baseline_score(std::span<const StrokeId> x, std::span<const StrokeId> y) {
  std::vector<int> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

}  // namespace taal
