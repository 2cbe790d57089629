// Frame-level post-processing of stroke classifier output, onset extraction,
// No-stroke target labeling and collar-based onset evaluation.

#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "taal/core.h"

namespace taal {

struct FrameLabelSequence {
  std::vector<StrokeId> labels;
  double hop_seconds = 0.010;
};

struct OnsetEvent {
  double time = 0.0;
  StrokeId label;

  friend bool operator==(const OnsetEvent&, const OnsetEvent&) = default;
};

struct OnsetAnnotation {
  std::vector<OnsetEvent> events;  // sorted by time, never kNoStroke
};

/// Single left-to-right pass: an interior frame whose neighbours agree with
/// each other but not with it takes the neighbours' label. The pass reads
/// already-updated labels on the left.
FrameLabelSequence smooth_labels(FrameLabelSequence frames);

/// One event at every label change (and at frame 0) unless the new label is
/// No-stroke.
OnsetAnnotation onsets_from_frames(const FrameLabelSequence& frames);

inline constexpr double kNoStrokeThreshold = 0.03;

/// Within each inter-onset segment, frames from the first one (at or after
/// the segment peak) whose amplitude drops below 3% of the peak onward become
/// No-stroke. All-zero segments become No-stroke entirely.
FrameLabelSequence label_no_stroke(FrameLabelSequence frames, std::span<const double> envelope);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int matches = 0;
  int reference_count = 0;
  int estimate_count = 0;
};

struct OnsetScores {
  std::map<StrokeId, PrecisionRecall> per_class;  // classes in reference or estimate
  PrecisionRecall average;                        // unweighted over reference classes
  double weighted_f1 = 0.0;                       // weighted by reference support
};

inline constexpr double kDefaultCollar = 0.050;

/// |t_ref - t_est| <= collar, with a 1 ns allowance for decimal round-off.
bool within_collar(double t_ref, double t_est, double collar);

/// Size of a maximum matching between two sorted time lists under the collar.
int max_collar_matching(std::span<const double> reference, std::span<const double> estimate,
                        double collar);

OnsetScores onset_f1(const OnsetAnnotation& reference, const OnsetAnnotation& estimate,
                     double collar = kDefaultCollar);

/// CSV with header `time_sec,label`, times printed with 6 decimals.
void write_onset_csv(std::ostream& out, const OnsetAnnotation& onsets, const Vocabulary& vocab);

/// Reads the CSV written above; unknown labels are interned into `vocab`.
/// Throws std::runtime_error with the line number on malformed input.
OnsetAnnotation read_onset_csv(std::istream& in, Vocabulary& vocab);

}  // namespace taal
