#include "taal/meta/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "taal/random.h"
#include "taal/transcription.h"

namespace taal::meta {
namespace {

constexpr std::uint64_t kNoStrokeStream = 0x4E0;
constexpr std::uint64_t kPoolStream = 0x9001;
constexpr std::uint64_t kUnseenStream = 0x7E57;
constexpr std::uint64_t kSampleStream = 0x5A3;

std::size_t draw_weighted(Rng& rng, const std::vector<double>& cumulative) {
  const double u = uniform01(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

}  // namespace

void SyntheticTaskConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (feature_dim == 0) fail("feature_dim must be positive");
  if (classes < 2) fail("classes must be >= 2 (No-stroke plus one stroke class)");
  if (frames_per_stroke == 0) fail("frames_per_stroke must be positive");
  if (!(decay_frames > 0.0)) fail("decay_frames must be positive");
  if (!(prototype_scale > 0.0)) fail("prototype_scale must be positive");
  if (!(noise >= 0.0)) fail("noise must be non-negative");
  if (!(domain_shift >= 0.0)) fail("domain_shift must be non-negative");
  if (!imbalance.empty()) {
    if (imbalance.size() != classes - 1) fail("imbalance needs one entry per stroke class");
    for (double w : imbalance) {
      if (!(w > 0.0)) fail("imbalance entries must be positive");
    }
  }
  if (train_tasks == 0) fail("train_tasks must be positive");
  if (merge_others && (keep_classes == 0 || keep_classes >= classes - 1)) {
    fail("keep_classes must lie in [1, classes - 2] when merging");
  }
}

std::size_t SyntheticTaskConfig::task_classes() const {
  return merge_others ? keep_classes + 2 : classes;
}

SyntheticTaskSource::SyntheticTaskSource(SyntheticTaskConfig cfg, int support_size, int query_size)
    : cfg_(std::move(cfg)), support_size_(support_size), query_size_(query_size) {
  cfg_.validate();
  if (support_size_ < 1 || query_size_ < 1) throw std::invalid_argument("support and query sizes must be >= 1");
  Rng rng(derive_seed(cfg_.seed, kNoStrokeStream));
  no_stroke_prototype_.resize(cfg_.feature_dim);
  for (auto& v : no_stroke_prototype_) v = cfg_.prototype_scale * standard_normal(rng);
  class_centres_.assign(cfg_.classes - 1, std::vector<double>(cfg_.feature_dim));
  for (auto& centre : class_centres_) {
    for (auto& v : centre) v = cfg_.prototype_scale * standard_normal(rng);
  }
}

FewShotTask SyntheticTaskSource::train_task(std::size_t epoch, std::size_t index) const {
  const auto slot = index % cfg_.train_tasks;
  return make_task(derive_seed(derive_seed(cfg_.seed, kPoolStream), slot),
                   derive_seed(derive_seed(cfg_.seed, kSampleStream + epoch), slot));
}

FewShotTask SyntheticTaskSource::unseen_task(std::size_t index) const {
  const auto base = derive_seed(cfg_.seed, kUnseenStream);
  return make_task(derive_seed(base, 2 * index), derive_seed(base, 2 * index + 1));
}

FewShotTask SyntheticTaskSource::make_task(std::uint64_t prototype_seed,
                                           std::uint64_t sample_seed) const {
  const std::size_t F = cfg_.feature_dim;
  const std::size_t strokes_classes = cfg_.classes - 1;

  auto prototypes = class_centres_;
  Rng proto_rng(prototype_seed);
  const double shift = cfg_.domain_shift * cfg_.prototype_scale;
  for (auto& p : prototypes) {
    for (auto& v : p) v += shift * standard_normal(proto_rng);
  }

  std::vector<double> cumulative(strokes_classes, 1.0);
  if (!cfg_.imbalance.empty()) cumulative = cfg_.imbalance;
  std::partial_sum(cumulative.begin(), cumulative.end(), cumulative.begin());

  const std::size_t L = cfg_.frames_per_stroke;
  const auto wanted = static_cast<std::size_t>(support_size_ + query_size_);
  const std::size_t n_strokes = std::max(strokes_classes, (2 * wanted + L - 1) / L);

  std::vector<double> envelope(L);
  for (std::size_t k = 0; k < L; ++k) envelope[k] = std::exp(-static_cast<double>(k) / cfg_.decay_frames);

  Rng rng(sample_seed);
  std::vector<Sample> pool;
  pool.reserve(n_strokes * L);
  for (std::size_t s = 0; s < n_strokes; ++s) {
    // Every stroke class occurs at least once, the rest follow the profile.
    const std::size_t cls = s < strokes_classes ? s : draw_weighted(rng, cumulative);
    FrameLabelSequence frames;
    frames.labels.assign(L, StrokeId{static_cast<std::uint16_t>(cls + 1)});
    frames = label_no_stroke(std::move(frames), envelope);
    for (std::size_t k = 0; k < L; ++k) {
      Sample sample;
      sample.features.resize(F);
      for (std::size_t i = 0; i < F; ++i) {
        sample.features[i] = envelope[k] * prototypes[cls][i] +
                             (1.0 - envelope[k]) * no_stroke_prototype_[i] +
                             cfg_.noise * standard_normal(rng);
      }
      int label = frames.labels[k].value;
      if (cfg_.merge_others && label > static_cast<int>(cfg_.keep_classes)) {
        label = static_cast<int>(cfg_.keep_classes) + 1;
      }
      sample.label = label;
      pool.push_back(std::move(sample));
    }
  }

  for (std::size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[uniform_index(rng, i)]);
  }

  FewShotTask task;
  task.support.assign(pool.begin(), pool.begin() + support_size_);
  task.query.assign(pool.begin() + support_size_, pool.begin() + static_cast<std::ptrdiff_t>(wanted));
  std::vector<int> counts(cfg_.task_classes(), 0);
  for (const auto& s : task.support) ++counts[static_cast<std::size_t>(s.label)];
  task.class_weights = class_weights(counts);
  return task;
}

}  // namespace taal::meta
