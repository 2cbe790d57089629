// Model-agnostic meta-learning over the surrogate model: inner-loop
// adaptation of phi on a support set, outer-loop update of phi from the
// post-adaptation query loss, episodic meta-training and meta-test adaptation.
//
// theta1 is never modified by anything in this header.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "taal/meta/model.h"

namespace taal::meta {

enum class MetaOrder { kSecond, kFirst };

struct MamlConfig {
  double alpha = 0.001;      // inner learning rate
  double beta = 0.001;       // meta learning rate
  int inner_steps = 3;       // N
  int epochs = 300;          // E
  int test_iterations = 10;  // E1
  int support_size = 32;     // s
  int query_size = 8;        // q
  int tasks_per_batch = 4;
  MetaOrder order = MetaOrder::kSecond;
  std::uint64_t seed = 2024;
  int threads = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

std::string to_string(MetaOrder order);
MetaOrder parse_meta_order(const std::string& text);

class AdaptationDiverged : public std::runtime_error {
 public:
  AdaptationDiverged(int step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Task with its samples already pushed through theta1.
struct EncodedTask {
  EncodedSet support;
  EncodedSet query;
  std::vector<double> class_weights;
};

EncodedTask encode(const FeatureMap& theta1, const FewShotTask& task);

struct AdaptResult {
  ParamVector phi;
  std::vector<double> support_loss;  // loss at phi^0 .. phi^N
};

/// phi^j = phi^{j-1} - alpha * grad L_support(phi^{j-1}), j = 1..steps.
/// Throws AdaptationDiverged (carrying j) if a loss turns non-finite.
AdaptResult inner_adapt(const HeadShape& head, const ParamVector& phi, const EncodedSet& support,
                        std::span<const double> weights, int steps, double alpha);
AdaptResult inner_adapt(const SurrogateModel& model, const FewShotTask& task, int steps,
                        double alpha);

struct MetaGradient {
  ParamVector gradient;                // d/dphi of the summed query losses
  std::vector<double> task_query_loss; // L_query(phi_N^i) per task
  double query_loss_sum = 0.0;
};

/// Gradient of sum_i L_query_i(phi_N^i(phi)). Second order differentiates
/// through every inner step; first order treats d phi_N / d phi as identity.
MetaGradient meta_gradient(const HeadShape& head, const ParamVector& phi,
                           std::span<const EncodedTask> tasks, const MamlConfig& cfg);

/// The end-to-end objective meta_gradient differentiates.
double unrolled_query_loss(const HeadShape& head, const ParamVector& phi,
                           std::span<const EncodedTask> tasks, const MamlConfig& cfg);

struct MetaUpdateResult {
  ParamVector phi;
  double query_loss = 0.0;  // mean over the batch, before the update
};

/// phi <- phi - beta * grad_phi sum_i L_query_i(phi_N^i).
MetaUpdateResult meta_update(const SurrogateModel& model, std::span<const FewShotTask> batch,
                             const MamlConfig& cfg);

/// Deterministic supplier of meta-training tasks.
class TaskSource {
 public:
  virtual ~TaskSource() = default;
  virtual std::size_t tasks_per_epoch() const = 0;
  virtual FewShotTask train_task(std::size_t epoch, std::size_t index) const = 0;
};

struct TrainResult {
  SurrogateModel model;
  std::vector<double> epoch_query_loss;  // mean pre-update query loss per epoch
};

/// Episodic meta-training: every epoch walks the task source in batches of
/// tasks_per_batch, adapting on support and updating phi from the query loss.
TrainResult meta_train(SurrogateModel initial, const TaskSource& source, const MamlConfig& cfg);

struct TraceRow {
  int step = 0;
  double support_loss = 0.0;
  double query_loss = 0.0;
};

struct TestAdaptResult {
  ParamVector phi;
  HeadShape head;
  double query_loss = 0.0;
  double query_accuracy = 0.0;
  std::vector<TraceRow> trace;  // step 0 is the unadapted model
};

/// Adapts a copy of the trained phi to a new task with test_iterations rounds
/// of inner_steps updates each, then scores the query set. A task with a
/// different class count gets a fresh classifier (seeded by
/// `classifier_seed`) on top of the transferred hidden layer.
TestAdaptResult meta_test_adapt(const SurrogateModel& trained, const FewShotTask& task,
                                const MamlConfig& cfg, std::uint64_t classifier_seed);

struct InitComparison {
  int tasks = 0;
  int wins = 0;
  std::vector<double> meta_query_loss;
  std::vector<double> random_query_loss;
  std::vector<double> meta_query_accuracy;
  std::vector<double> random_query_accuracy;
  std::vector<TraceRow> meta_trace;    // mean over tasks, per step
  std::vector<TraceRow> random_trace;

  double win_rate() const { return tasks > 0 ? static_cast<double>(wins) / tasks : 0.0; }
};

/// Paired experiment: for each unseen task, adapt from the trained phi and
/// from a freshly seeded random phi with identical settings and compare the
/// final query losses.
InitComparison compare_initializations(const SurrogateModel& trained,
                                       const std::function<FewShotTask(std::size_t)>& unseen_task,
                                       int tasks, const MamlConfig& cfg);

}  // namespace taal::meta
