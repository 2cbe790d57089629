#include "taal/transcription.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace taal {
namespace {

PrecisionRecall make_pr(int matches, int ref_count, int est_count) {
  PrecisionRecall pr;
  pr.matches = matches;
  pr.reference_count = ref_count;
  pr.estimate_count = est_count;
  pr.precision = est_count > 0 ? static_cast<double>(matches) / est_count : 0.0;
  pr.recall = ref_count > 0 ? static_cast<double>(matches) / ref_count : 0.0;
  double denom = pr.precision + pr.recall;
  pr.f1 = denom > 0.0 ? 2.0 * pr.precision * pr.recall / denom : 0.0;
  return pr;
}

std::vector<std::size_t> onset_frames(const std::vector<StrokeId>& labels) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool change = i == 0 || labels[i] != labels[i - 1];
    if (change && labels[i] != kNoStroke) out.push_back(i);
  }
  return out;
}

}  // namespace

FrameLabelSequence smooth_labels(FrameLabelSequence frames) {
  auto& l = frames.labels;
  for (std::size_t i = 1; i + 1 < l.size(); ++i) {
    if (l[i - 1] == l[i + 1] && l[i] != l[i - 1]) l[i] = l[i - 1];
  }
  return frames;
}

OnsetAnnotation onsets_from_frames(const FrameLabelSequence& frames) {
  OnsetAnnotation out;
  for (auto i : onset_frames(frames.labels)) {
    out.events.push_back({static_cast<double>(i) * frames.hop_seconds, frames.labels[i]});
  }
  return out;
}

FrameLabelSequence label_no_stroke(FrameLabelSequence frames, std::span<const double> envelope) {
  auto& l = frames.labels;
  if (envelope.size() != l.size()) {
    throw std::invalid_argument("envelope length does not match frame count");
  }
  auto starts = onset_frames(l);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const std::size_t begin = starts[k];
    const std::size_t end = k + 1 < starts.size() ? starts[k + 1] : l.size();
    auto peak_it = std::max_element(envelope.begin() + static_cast<std::ptrdiff_t>(begin),
                                    envelope.begin() + static_cast<std::ptrdiff_t>(end));
    const double peak = *peak_it;
    std::size_t cut = end;
    if (peak <= 0.0) {
      cut = begin;
    } else {
      const double threshold = kNoStrokeThreshold * peak;
      for (auto i = static_cast<std::size_t>(peak_it - envelope.begin()); i < end; ++i) {
        if (envelope[i] < threshold) {
          cut = i;
          break;
        }
      }
    }
    std::fill(l.begin() + static_cast<std::ptrdiff_t>(cut),
              l.begin() + static_cast<std::ptrdiff_t>(end), kNoStroke);
  }
  return frames;
}

bool within_collar(double t_ref, double t_est, double collar) {
  return std::abs(t_ref - t_est) <= collar + 1e-9;
}

int max_collar_matching(std::span<const double> reference, std::span<const double> estimate,
                        double collar) {
  // Each reference's feasible window [t - c, t + c] moves monotonically with
  // t, so matching every reference to the earliest still-free feasible
  // estimate is optimal.
  int matches = 0;
  std::size_t j = 0;
  for (double r : reference) {
    while (j < estimate.size() && estimate[j] < r && !within_collar(r, estimate[j], collar)) {
      ++j;
    }
    if (j < estimate.size() && within_collar(r, estimate[j], collar)) {
      ++matches;
      ++j;
    }
  }
  return matches;
}

OnsetScores onset_f1(const OnsetAnnotation& reference, const OnsetAnnotation& estimate,
                     double collar) {
  if (!(collar > 0.0)) throw std::invalid_argument("collar must be positive");
  std::map<StrokeId, std::pair<std::vector<double>, std::vector<double>>> by_class;
  for (const auto& e : reference.events) by_class[e.label].first.push_back(e.time);
  for (const auto& e : estimate.events) by_class[e.label].second.push_back(e.time);

  OnsetScores scores;
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0, weighted = 0.0;
  int classes = 0, support = 0;
  for (auto& [label, times] : by_class) {
    auto& [ref, est] = times;
    std::sort(ref.begin(), ref.end());
    std::sort(est.begin(), est.end());
    int m = max_collar_matching(ref, est, collar);
    auto pr = make_pr(m, static_cast<int>(ref.size()), static_cast<int>(est.size()));
    scores.per_class[label] = pr;
    if (!ref.empty()) {
      ++classes;
      p_sum += pr.precision;
      r_sum += pr.recall;
      f_sum += pr.f1;
      weighted += pr.f1 * static_cast<double>(ref.size());
      support += static_cast<int>(ref.size());
    }
  }
  if (classes > 0) {
    scores.average.precision = p_sum / classes;
    scores.average.recall = r_sum / classes;
    scores.average.f1 = f_sum / classes;
    scores.weighted_f1 = weighted / support;
  }
  for (const auto& [label, pr] : scores.per_class) {
    scores.average.matches += pr.matches;
    scores.average.reference_count += pr.reference_count;
    scores.average.estimate_count += pr.estimate_count;
  }
  return scores;
}

void write_onset_csv(std::ostream& out, const OnsetAnnotation& onsets, const Vocabulary& vocab) {
  out << "time_sec,label\n";
  char buf[64];
  for (const auto& e : onsets.events) {
    std::snprintf(buf, sizeof buf, "%.6f", e.time);
    out << buf << ',' << vocab.name(e.label) << '\n';
  }
}

OnsetAnnotation read_onset_csv(std::istream& in, Vocabulary& vocab) {
  OnsetAnnotation out;
  std::string line;
  int line_no = 0;
  auto fail = [&line_no](const std::string& what) {
    throw std::runtime_error("onset csv line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "time_sec,label") fail("expected header 'time_sec,label'");
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) fail("missing ','");
    double t = 0.0;
    try {
      std::size_t used = 0;
      t = std::stod(line.substr(0, comma), &used);
      if (used != comma) fail("bad time value");
    } catch (const std::logic_error&) {
      fail("bad time value");
    }
    if (!(t >= 0.0)) fail("negative time");
    auto label = vocab.intern(line.substr(comma + 1));
    if (label == kNoStroke) fail("No-stroke is not an onset label");
    if (!out.events.empty() && t < out.events.back().time) fail("times not sorted");
    out.events.push_back({t, label});
  }
  if (line_no == 0) fail("missing header");
  return out;
}

}  // namespace taal
