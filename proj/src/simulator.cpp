#include "taal/simulator.h"

#include <algorithm>
#include <stdexcept>

#include "taal/random.h"

namespace taal {
namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

StrokeSequence generate_performance(const PerformanceSpec& spec) {
  const TalaDefinition* tala = find_tala(spec.tala);
  if (tala == nullptr) throw std::invalid_argument("unknown tala '" + spec.tala + "'");
  if (spec.cycles < 1) throw std::invalid_argument("cycles must be positive");
  if (!(spec.tempo_bpm > 0.0)) throw std::invalid_argument("tempo must be positive");
  if (spec.start_offset < 0 || spec.start_offset >= tala->matra_count) {
    throw std::invalid_argument("start_offset out of range");
  }

  const auto theka = spec.gharana_variant ? tala->variant_theka() : tala->theka;
  const auto m = static_cast<std::size_t>(tala->matra_count);
  const std::size_t n = m * static_cast<std::size_t>(spec.cycles);
  const double beat = 60.0 / spec.tempo_bpm;

  StrokeSequence seq;
  seq.strokes.reserve(n);
  seq.onset_times.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    seq.strokes.push_back(theka[(i + static_cast<std::size_t>(spec.start_offset)) % m]);
    seq.onset_times.push_back(static_cast<double>(i) * beat);
  }
  return seq;
}

void NoiseSpec::validate() const {
  if (!is_probability(p_sub) || !is_probability(p_del) || !is_probability(p_ins)) {
    throw std::invalid_argument("noise probabilities must lie in [0, 1]");
  }
  if (p_sub + p_del > 1.0) throw std::invalid_argument("p_sub + p_del must not exceed 1");
}

std::vector<StrokeId> default_insertion_vocabulary() {
  std::vector<StrokeId> out;
  for (const auto& t : builtin_talas()) {
    out.insert(out.end(), t.theka.begin(), t.theka.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

StrokeSequence corrupt(const StrokeSequence& seq, const NoiseSpec& noise,
                       CorruptionStats* stats) {
  noise.validate();
  seq.validate();
  const auto vocab =
      noise.insertion_vocabulary.empty() ? default_insertion_vocabulary() : noise.insertion_vocabulary;
  Rng rng(noise.seed);
  CorruptionStats local;

  const bool timed = seq.has_onsets();
  StrokeSequence out;
  out.strokes.reserve(seq.size());
  if (timed) out.onset_times.reserve(seq.size());

  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double u = uniform01(rng);
    if (u < noise.p_del) {
      ++local.deleted;
    } else {
      StrokeId s = seq.strokes[i];
      if (uniform01(rng) < noise.p_sub) {
        std::vector<StrokeId> others;
        std::copy_if(vocab.begin(), vocab.end(), std::back_inserter(others),
                     [s](StrokeId v) { return v != s; });
        if (!others.empty()) {
          s = others[uniform_index(rng, others.size())];
          ++local.substituted;
        }
      }
      out.strokes.push_back(s);
      if (timed) out.onset_times.push_back(seq.onset_times[i]);
    }
    if (uniform01(rng) < noise.p_ins && !vocab.empty()) {
      out.strokes.push_back(vocab[uniform_index(rng, vocab.size())]);
      ++local.inserted;
      if (timed) {
        double t = seq.onset_times[i];
        double next;
        if (i + 1 < seq.size()) {
          next = seq.onset_times[i + 1];
        } else {
          double step = i > 0 ? t - seq.onset_times[i - 1] : 0.5;
          next = t + step;
        }
        out.onset_times.push_back(0.5 * (t + next));
      }
    }
  }
  if (stats != nullptr) *stats = local;
  return out;
}

}  // namespace taal
