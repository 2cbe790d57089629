// Synthetic few-shot stroke-frame tasks.
//
// A task stands for one recording domain: each stroke class gets a prototype
// equal to a class centre shared by all tasks plus a per-task domain shift. A
// pseudo-stroke is a run of frames whose features decay from the class
// prototype toward a No-stroke prototype shared by all tasks. Frame labels follow the 3%-of-peak rule, so
// the tail of every stroke is class 0 ("No-stroke").

#pragma once

#include <cstdint>
#include <vector>

#include "taal/meta/maml.h"

namespace taal::meta {

struct SyntheticTaskConfig {
  std::size_t feature_dim = 16;
  std::size_t classes = 5;           // No-stroke + (classes - 1) stroke classes
  std::size_t frames_per_stroke = 8;
  double decay_frames = 1.0;         // envelope time constant, in frames
  double prototype_scale = 1.0;
  double domain_shift = 0.5;         // per-task prototype deviation, relative to prototype_scale
  double noise = 0.3;                // isotropic frame noise stddev
  std::vector<double> imbalance;     // relative stroke-class frequencies; empty = uniform
  std::size_t train_tasks = 16;      // size of the meta-training task pool
  bool merge_others = false;         // fold stroke classes beyond keep_classes into "Others"
  std::size_t keep_classes = 0;
  std::uint64_t seed = 7;

  void validate() const;
  /// Classes per task after an optional merge.
  std::size_t task_classes() const;
};

class SyntheticTaskSource : public TaskSource {
 public:
  SyntheticTaskSource(SyntheticTaskConfig cfg, int support_size, int query_size);

  std::size_t tasks_per_epoch() const override { return cfg_.train_tasks; }
  /// Task `index % train_tasks` of the pool with frames freshly sampled for
  /// this epoch.
  FewShotTask train_task(std::size_t epoch, std::size_t index) const override;
  /// Tasks whose prototypes come from a stream disjoint from the pool.
  FewShotTask unseen_task(std::size_t index) const;

  /// Builds one task from a prototype seed and a sampling seed.
  FewShotTask make_task(std::uint64_t prototype_seed, std::uint64_t sample_seed) const;

  const SyntheticTaskConfig& config() const { return cfg_; }

 private:
  SyntheticTaskConfig cfg_;
  int support_size_;
  int query_size_;
  std::vector<double> no_stroke_prototype_;
  std::vector<std::vector<double>> class_centres_;
};

}  // namespace taal::meta
