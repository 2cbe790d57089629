#include "taal/meta/maml.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include "taal/random.h"

namespace taal::meta {
namespace {

void accumulate_trace(std::vector<TraceRow>& sum, const std::vector<TraceRow>& trace) {
  if (sum.empty()) {
    sum = trace;
    return;
  }
  for (std::size_t i = 0; i < sum.size(); ++i) {
    sum[i].support_loss += trace[i].support_loss;
    sum[i].query_loss += trace[i].query_loss;
  }
}

void average_trace(std::vector<TraceRow>& sum, int count) {
  for (auto& row : sum) {
    row.support_loss /= count;
    row.query_loss /= count;
  }
}

struct TaskGradient {
  ParamVector gradient;
  double query_loss = 0.0;
};

TaskGradient task_meta_gradient(const HeadShape& head, const ParamVector& phi,
                                const EncodedTask& task, const MamlConfig& cfg) {
  // Keep every iterate: the backward sweep needs the Hessian at each.
  std::vector<ParamVector> iterates;
  iterates.reserve(static_cast<std::size_t>(cfg.inner_steps) + 1);
  iterates.push_back(phi);
  ParamVector g;
  for (int j = 1; j <= cfg.inner_steps; ++j) {
    double loss = head_loss(head, iterates.back(), task.support, task.class_weights, &g);
    if (!std::isfinite(loss)) throw AdaptationDiverged(j, "support loss diverged");
    iterates.push_back(sgd_step(iterates.back(), g, cfg.alpha));
  }

  TaskGradient out;
  out.query_loss = head_loss(head, iterates.back(), task.query, task.class_weights, &out.gradient);
  if (!std::isfinite(out.query_loss)) throw AdaptationDiverged(cfg.inner_steps, "query loss diverged");

  if (cfg.order == MetaOrder::kSecond) {
    // v <- (I - alpha H(phi^{j-1})) v, from the last inner step back to the first.
    for (int j = cfg.inner_steps; j >= 1; --j) {
      auto hv = head_hvp(head, iterates[static_cast<std::size_t>(j - 1)], task.support,
                         task.class_weights, out.gradient);
      for (std::size_t k = 0; k < hv.size(); ++k) out.gradient.values[k] -= cfg.alpha * hv.values[k];
    }
  }
  return out;
}

std::vector<TaskGradient> all_task_gradients(const HeadShape& head, const ParamVector& phi,
                                             std::span<const EncodedTask> tasks,
                                             const MamlConfig& cfg) {
  std::vector<TaskGradient> results(tasks.size());
  const auto workers = static_cast<std::size_t>(std::max(1, cfg.threads));
  if (workers == 1 || tasks.size() < 2) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      results[i] = task_meta_gradient(head, phi, tasks[i], cfg);
    }
    return results;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < tasks.size(); i += workers) {
            results[i] = task_meta_gradient(head, phi, tasks[i], cfg);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<EncodedTask> encode_all(const FeatureMap& theta1, std::span<const FewShotTask> batch) {
  std::vector<EncodedTask> out;
  out.reserve(batch.size());
  for (const auto& t : batch) out.push_back(encode(theta1, t));
  return out;
}

}  // namespace

void MamlConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be a non-negative number");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be a non-negative number");
  if (inner_steps < 1) fail("inner_steps must be >= 1");
  if (epochs < 0) fail("epochs must be >= 0");
  if (test_iterations < 0) fail("test_iterations must be >= 0");
  if (support_size < 1) fail("support_size must be >= 1");
  if (query_size < 1) fail("query_size must be >= 1");
  if (tasks_per_batch < 1) fail("tasks_per_batch must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
}

std::string to_string(MetaOrder order) {
  return order == MetaOrder::kSecond ? "second_order" : "first_order";
}

MetaOrder parse_meta_order(const std::string& text) {
  if (text == "second_order" || text == "second") return MetaOrder::kSecond;
  if (text == "first_order" || text == "first") return MetaOrder::kFirst;
  throw std::invalid_argument("order must be second_order or first_order");
}

EncodedTask encode(const FeatureMap& theta1, const FewShotTask& task) {
  task.validate();
  return {encode(theta1, task.support), encode(theta1, task.query), task.class_weights};
}

AdaptResult inner_adapt(const HeadShape& head, const ParamVector& phi, const EncodedSet& support,
                        std::span<const double> weights, int steps, double alpha) {
  if (steps < 1) throw std::invalid_argument("inner_adapt needs at least one step");
  AdaptResult out;
  out.phi = phi;
  ParamVector g;
  for (int j = 1; j <= steps; ++j) {
    double loss = head_loss(head, out.phi, support, weights, &g);
    if (!std::isfinite(loss) || !g.all_finite()) throw AdaptationDiverged(j, "support loss diverged");
    out.support_loss.push_back(loss);
    out.phi = sgd_step(out.phi, g, alpha);
  }
  double final_loss = head_loss(head, out.phi, support, weights);
  if (!std::isfinite(final_loss)) throw AdaptationDiverged(steps, "support loss diverged");
  out.support_loss.push_back(final_loss);
  return out;
}

AdaptResult inner_adapt(const SurrogateModel& model, const FewShotTask& task, int steps,
                        double alpha) {
  auto enc = encode(model.theta1(), task);
  return inner_adapt(model.head(), model.phi(), enc.support, enc.class_weights, steps, alpha);
}

MetaGradient meta_gradient(const HeadShape& head, const ParamVector& phi,
                           std::span<const EncodedTask> tasks, const MamlConfig& cfg) {
  cfg.validate();
  if (tasks.empty()) throw std::invalid_argument("empty task batch");
  auto per_task = all_task_gradients(head, phi, tasks, cfg);
  MetaGradient out;
  out.gradient = ParamVector(phi.layout);
  // Fixed reduction order keeps threaded and serial runs bit-identical.
  for (const auto& r : per_task) {
    for (std::size_t k = 0; k < r.gradient.size(); ++k) out.gradient.values[k] += r.gradient.values[k];
    out.task_query_loss.push_back(r.query_loss);
    out.query_loss_sum += r.query_loss;
  }
  return out;
}

double unrolled_query_loss(const HeadShape& head, const ParamVector& phi,
                           std::span<const EncodedTask> tasks, const MamlConfig& cfg) {
  double total = 0.0;
  for (const auto& task : tasks) {
    auto adapted = inner_adapt(head, phi, task.support, task.class_weights, cfg.inner_steps, cfg.alpha);
    total += head_loss(head, adapted.phi, task.query, task.class_weights);
  }
  return total;
}

MetaUpdateResult meta_update(const SurrogateModel& model, std::span<const FewShotTask> batch,
                             const MamlConfig& cfg) {
  auto tasks = encode_all(model.theta1(), batch);
  for (const auto& t : tasks) {
    if (t.class_weights.size() != model.head().classes) {
      throw std::invalid_argument("task class count does not match the model");
    }
  }
  auto mg = meta_gradient(model.head(), model.phi(), tasks, cfg);
  MetaUpdateResult out;
  out.phi = sgd_step(model.phi(), mg.gradient, cfg.beta);
  out.query_loss = mg.query_loss_sum / static_cast<double>(tasks.size());
  return out;
}

TrainResult meta_train(SurrogateModel initial, const TaskSource& source, const MamlConfig& cfg) {
  cfg.validate();
  TrainResult result{std::move(initial), {}};
  const std::size_t per_epoch = source.tasks_per_epoch();
  if (per_epoch == 0 && cfg.epochs > 0) throw std::invalid_argument("task source is empty");
  const auto batch_size = static_cast<std::size_t>(cfg.tasks_per_batch);

  std::vector<FewShotTask> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < per_epoch; start += batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(per_epoch, start + batch_size); ++i) {
        batch.push_back(source.train_task(static_cast<std::size_t>(epoch), i));
      }
      auto update = meta_update(result.model, batch, cfg);
      loss_sum += update.query_loss * static_cast<double>(batch.size());
      result.model.set_phi(std::move(update.phi));
    }
    result.epoch_query_loss.push_back(loss_sum / static_cast<double>(per_epoch));
  }
  return result;
}

TestAdaptResult meta_test_adapt(const SurrogateModel& trained, const FewShotTask& task,
                                const MamlConfig& cfg, std::uint64_t classifier_seed) {
  cfg.validate();
  const SurrogateModel model = task.num_classes() == trained.head().classes
                                   ? trained
                                   : trained.with_classes(task.num_classes(), classifier_seed);
  auto enc = encode(model.theta1(), task);

  TestAdaptResult out;
  out.head = model.head();
  out.phi = model.phi();
  int step = 0;
  out.trace.push_back({0, head_loss(out.head, out.phi, enc.support, enc.class_weights),
                       head_loss(out.head, out.phi, enc.query, enc.class_weights)});
  for (int it = 0; it < cfg.test_iterations; ++it) {
    auto adapted = inner_adapt(out.head, out.phi, enc.support, enc.class_weights, cfg.inner_steps,
                               cfg.alpha);
    out.phi = std::move(adapted.phi);
    step += cfg.inner_steps;
    out.trace.push_back({step, adapted.support_loss.back(),
                         head_loss(out.head, out.phi, enc.query, enc.class_weights)});
  }
  out.query_loss = out.trace.back().query_loss;
  out.query_accuracy = accuracy(out.head, out.phi, enc.query);
  return out;
}

InitComparison compare_initializations(const SurrogateModel& trained,
                                       const std::function<FewShotTask(std::size_t)>& unseen_task,
                                       int tasks, const MamlConfig& cfg) {
  InitComparison cmp;
  for (int j = 0; j < tasks; ++j) {
    const auto task = unseen_task(static_cast<std::size_t>(j));
    const auto key = static_cast<std::uint64_t>(j);
    auto meta = meta_test_adapt(trained, task, cfg, derive_seed(cfg.seed, 0xC1A55000 + key));

    HeadShape head = trained.head();
    head.classes = task.num_classes();
    SurrogateModel random(trained.theta1(), head, init_head(head, derive_seed(cfg.seed, 0x5EED0000 + key)));
    auto base = meta_test_adapt(random, task, cfg, 0);

    ++cmp.tasks;
    if (meta.query_loss < base.query_loss) ++cmp.wins;
    cmp.meta_query_loss.push_back(meta.query_loss);
    cmp.random_query_loss.push_back(base.query_loss);
    cmp.meta_query_accuracy.push_back(meta.query_accuracy);
    cmp.random_query_accuracy.push_back(base.query_accuracy);
    accumulate_trace(cmp.meta_trace, meta.trace);
    accumulate_trace(cmp.random_trace, base.trace);
  }
  if (cmp.tasks > 0) {
    average_trace(cmp.meta_trace, cmp.tasks);
    average_trace(cmp.random_trace, cmp.tasks);
  }
  return cmp;
}

}  // namespace taal::meta
