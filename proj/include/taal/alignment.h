// Needleman-Wunsch matching score, sliding-window tala score and an LCS
// baseline.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "taal/core.h"

namespace taal {

struct NwScoring {
  int match = 1;
  int mismatch = -1;
  int gap = -2;
};

/// Full (rows+1) x (cols+1) dynamic-programming table, row-major.
class ScoreMatrix {
 public:
  ScoreMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), cells_((rows + 1) * (cols + 1), 0) {}

  int& operator()(std::size_t i, std::size_t j) { return cells_[i * (cols_ + 1) + j]; }
  int operator()(std::size_t i, std::size_t j) const { return cells_[i * (cols_ + 1) + j]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<int> cells_;
};

ScoreMatrix nw_matrix(std::span<const StrokeId> reference, std::span<const StrokeId> test,
                      const NwScoring& scoring = {});

enum class AlignOp { kMatch, kMismatch, kGapInTest, kGapInReference };

struct AlignmentPath {
  std::vector<AlignOp> ops;  // from (0,0) to (rows, cols)
  int score = 0;             // sum of step scores along the path
};

/// Backtracks one optimal path from the bottom-right cell.
AlignmentPath nw_backtrack(const ScoreMatrix& matrix, std::span<const StrokeId> reference,
                           std::span<const StrokeId> test, const NwScoring& scoring = {});

/// Optimal global alignment score S[m][w]. Rolling two-row DP; throws
/// std::invalid_argument("empty sequence") if either side is empty.
int nw_score(std::span<const StrokeId> reference, std::span<const StrokeId> test,
             const NwScoring& scoring = {});

struct IdentifyOptions {
  bool gharana_equivalence = false;
  NwScoring scoring{};
};

struct MatchResult {
  double sigma_nw = 0.0;
  std::vector<double> per_window_max;
  int window_count = 0;
  bool short_input = false;
};

/// Slides an m-stroke window over the transcription with hop 1, scores each
/// window against the best cyclic rotation of the theka, takes the maximum
/// within consecutive blocks of m offsets and averages the block maxima.
MatchResult sliding_match_score(std::span<const StrokeId> transcribed,
                                const TalaDefinition& tala,
                                const IdentifyOptions& options = {});

struct RankedTala {
  std::string tala;
  int matra_count = 0;
  double score = 0.0;       // sigma_nw for NW, raw cosine for ratio
  double normalized = 0.0;  // ranking key
  double coverage = 1.0;    // ratio method only
};

struct Ranking {
  std::string method;
  std::vector<RankedTala> entries;  // sorted by `normalized`, descending
  bool low_confidence = false;
  bool short_input = false;

  const RankedTala& top() const { return entries.front(); }
};

/// Descending by key, ties by ascending matra count, then name.
void sort_ranking(std::vector<RankedTala>& entries);

Ranking identify_tala_nw(std::span<const StrokeId> transcribed,
                         const std::vector<TalaDefinition>& talas,
                         const IdentifyOptions& options = {});

/// Classic longest-common-subsequence length.
int lcs_baseline_score(std::span<const StrokeId> x, std::span<const StrokeId> y);

}  // namespace taal
