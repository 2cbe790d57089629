#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "oracles.h"
#include "taal/meta/maml.h"
#include "taal/meta/synthetic.h"
#include "taal/random.h"

using namespace taal;
using namespace taal::meta;

namespace {

FewShotTask random_task(std::uint64_t seed, std::size_t dim, std::size_t classes, int support, int query) {
  Rng rng(seed);
  FewShotTask t;
  auto draw = [&](int n, std::vector<Sample>& out) {
    for (int i = 0; i < n; ++i) {
      Sample s;
      // The first `classes` samples cover every label once.
      const auto label = static_cast<std::size_t>(i) < classes ? static_cast<std::size_t>(i) : uniform_index(rng, classes);
      s.label = static_cast<int>(label);
      for (std::size_t d = 0; d < dim; ++d) s.features.push_back(standard_normal(rng) + 0.5 * s.label);
      out.push_back(std::move(s));
    }
  };
  draw(support, t.support);
  draw(query, t.query);
  std::vector<int> counts(classes, 0);
  for (const auto& s : t.support) ++counts[static_cast<std::size_t>(s.label)];
  t.class_weights = class_weights(counts);
  return t;
}

struct TinyInstance {
  SurrogateModel model;
  std::vector<EncodedTask> tasks;
};

// F = H = C = 2 with a random phi scaled up so the curvature terms matter.
TinyInstance tiny_instance(std::uint64_t seed, std::size_t task_count) {
  auto model = SurrogateModel::create(2, 2, 2, seed);
  auto phi = model.phi();
  Rng rng(derive_seed(seed, 77));
  for (auto& v : phi.values) v = standard_normal(rng);
  model.set_phi(phi);
  TinyInstance inst{model, {}};
  for (std::size_t i = 0; i < task_count; ++i) {
    inst.tasks.push_back(encode(model.theta1(), random_task(derive_seed(seed, 100 + i), 2, 2, 6, 4)));
  }
  return inst;
}

double mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin),
                         v.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
         static_cast<double>(end - begin);
}

}  // namespace

TEST_CASE("wce_loss worked examples") {
  FrameMatrix uniform(4, 1), onehot(4, 1);
  for (std::size_t c = 0; c < 4; ++c) uniform(c, 0) = 0.25;
  onehot(2, 0) = 1.0;
  std::vector<double> ones(4, 1.0);
  CHECK(wce_loss(uniform, onehot, ones) == doctest::Approx(std::log(4.0)));

  FrameMatrix p(2, 1), y(2, 1);
  p(0, 0) = 0.8;
  p(1, 0) = 0.2;
  y(0, 0) = 1.0;
  CHECK(wce_loss(p, y, std::vector<double>{2.0, 1.0}) == doctest::Approx(-2.0 * std::log(0.8)));
  CHECK(wce_loss(p, y, std::vector<double>{2.0, 1.0}) == doctest::Approx(0.4463).epsilon(1e-3));

  // Averaged over frames, and a zero probability is floored.
  FrameMatrix p2(2, 2), y2(2, 2);
  p2(0, 0) = 1.0;
  p2(1, 1) = 0.0;
  p2(0, 1) = 1.0;
  y2(0, 0) = 1.0;
  y2(1, 1) = 1.0;
  CHECK(wce_loss(p2, y2, std::vector<double>{1.0, 1.0}) == doctest::Approx(-std::log(1e-12) / 2.0));

  CHECK_THROWS_AS(wce_loss(p, y, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(wce_loss(p, y2, std::vector<double>{1.0, 1.0}), std::invalid_argument);
  p(0, 0) = std::nan("");
  CHECK_THROWS_AS(wce_loss(p, y, std::vector<double>{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("wce_loss_from_logits agrees with softmax then wce_loss") {
  Rng rng(9);
  FrameMatrix logits(3, 5), targets(3, 5), probs(3, 5);
  for (std::size_t t = 0; t < 5; ++t) {
    double z = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      logits(c, t) = 3.0 * standard_normal(rng);
      z += std::exp(logits(c, t));
    }
    for (std::size_t c = 0; c < 3; ++c) probs(c, t) = std::exp(logits(c, t)) / z;
    targets(uniform_index(rng, 3), t) = 1.0;
  }
  std::vector<double> w{0.5, 1.0, 1.5};
  CHECK(wce_loss_from_logits(logits, targets, w) == doctest::Approx(wce_loss(probs, targets, w)));
  // Huge logits stay finite.
  logits(0, 0) = 1e4;
  CHECK(std::isfinite(wce_loss_from_logits(logits, targets, w)));
}

TEST_CASE("class weights") {
  auto w = class_weights(std::vector<int>{30, 10});
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(1.5));
  auto raw = raw_class_weights(std::vector<int>{90, 10});
  CHECK(raw[1] / raw[0] == doctest::Approx(9.0));
  auto missing = class_weights(std::vector<int>{10, 0, 30});
  CHECK(missing[1] == doctest::Approx(missing[0]));
  CHECK((missing[0] + missing[1] + missing[2]) / 3.0 == doctest::Approx(1.0));
  CHECK_THROWS_AS(class_weights(std::vector<int>{0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(class_weights(std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("sgd_step") {
  ParamVector p(ParamLayout({{"w", 1, 2}}));
  p.values = {1.0, 2.0};
  ParamVector g = p;
  g.values = {1.0, 1.0};
  CHECK(sgd_step(p, g, 0.5).values == std::vector<double>{0.5, 1.5});
  CHECK(sgd_step(p, g, 0.0) == p);

  // Gradient of |x|^2 / 2 is x: k steps scale by (1 - lr)^k.
  ParamVector x = p;
  for (int k = 0; k < 10; ++k) x = sgd_step(x, x, 0.1);
  CHECK(x.values[0] == doctest::Approx(std::pow(0.9, 10)));
  CHECK(x.values[1] == doctest::Approx(2.0 * std::pow(0.9, 10)));

  ParamVector other(ParamLayout({{"v", 2, 1}}));
  CHECK_THROWS_AS(sgd_step(p, other, 0.1), std::invalid_argument);
  g.values[0] = INFINITY;
  CHECK_THROWS_AS(sgd_step(p, g, 0.1), std::invalid_argument);
}

TEST_CASE("head_loss gradient matches finite differences per layer") {
  for (std::size_t hidden : {0u, 3u}) {
    HeadShape head{4, hidden, 3};
    auto phi = init_head(head, 5);
    Rng rng(6);
    for (auto& v : phi.values) v += 0.3 * standard_normal(rng);
    auto set = encode(FeatureMap::random(3, 4, 8), random_task(21, 3, 3, 10, 1).support);
    std::vector<double> w{0.7, 1.1, 1.2};
    ParamVector grad;
    head_loss(head, phi, set, w, &grad);
    auto fd = oracle::central_difference([&](const ParamVector& p) { return head_loss(head, p, set, w); },
                                         phi, 1e-6);
    for (std::size_t l = 0; l < phi.layout.layers().size(); ++l) {
      CAPTURE(phi.layout.layers()[l].name);
      const auto off = phi.layout.offset(l);
      const auto n = phi.layout.layers()[l].size();
      std::vector<double> a(grad.values.begin() + static_cast<std::ptrdiff_t>(off),
                            grad.values.begin() + static_cast<std::ptrdiff_t>(off + n));
      std::vector<double> b(fd.begin() + static_cast<std::ptrdiff_t>(off),
                            fd.begin() + static_cast<std::ptrdiff_t>(off + n));
      CHECK(oracle::relative_error(a, b) < 1e-6);
    }
  }
}

TEST_CASE("head_hvp matches finite differences of the gradient") {
  HeadShape head{3, 4, 3};
  auto phi = init_head(head, 1);
  Rng rng(2);
  for (auto& v : phi.values) v += 0.5 * standard_normal(rng);
  auto set = encode(FeatureMap::identity(3), random_task(4, 3, 3, 12, 1).support);
  std::vector<double> w{1.0, 0.8, 1.2};
  ParamVector dir(phi.layout);
  for (auto& v : dir.values) v = standard_normal(rng);

  auto hv = head_hvp(head, phi, set, w, dir);
  const double h = 1e-5;
  ParamVector up = phi, down = phi, gu, gd;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    up.values[i] += h * dir.values[i];
    down.values[i] -= h * dir.values[i];
  }
  head_loss(head, up, set, w, &gu);
  head_loss(head, down, set, w, &gd);
  std::vector<double> fd(phi.size());
  for (std::size_t i = 0; i < fd.size(); ++i) fd[i] = (gu.values[i] - gd.values[i]) / (2.0 * h);
  CHECK(oracle::relative_error(hv.values, fd) < 1e-6);
}

TEST_CASE("inner_adapt") {
  auto model = SurrogateModel::create(4, 6, 3, 11);
  auto task = random_task(12, 4, 3, 16, 8);
  SUBCASE("records N + 1 support losses") {
    auto r = inner_adapt(model, task, 3, 0.05);
    REQUIRE(r.support_loss.size() == 4);
    auto enc = encode(model.theta1(), task);
    CHECK(r.support_loss[0] == doctest::Approx(head_loss(model.head(), model.phi(), enc.support, enc.class_weights)));
    CHECK(r.support_loss[3] == doctest::Approx(head_loss(model.head(), r.phi, enc.support, enc.class_weights)));
  }
  SUBCASE("alpha = 0 leaves phi unchanged") {
    CHECK(inner_adapt(model, task, 5, 0.0).phi == model.phi());
  }
  SUBCASE("one step equals a manual SGD step") {
    auto enc = encode(model.theta1(), task);
    ParamVector g;
    head_loss(model.head(), model.phi(), enc.support, enc.class_weights, &g);
    CHECK(inner_adapt(model, task, 1, 0.1).phi == sgd_step(model.phi(), g, 0.1));
  }
  SUBCASE("linear head on identity features descends monotonically") {
    HeadShape linear{4, 0, 3};
    SurrogateModel convex(FeatureMap::identity(4), linear, init_head(linear, 3));
    auto r = inner_adapt(convex, task, 50, 0.1);
    for (std::size_t j = 1; j < r.support_loss.size(); ++j) {
      CHECK(r.support_loss[j] <= r.support_loss[j - 1] + 1e-12);
    }
  }
  SUBCASE("divergence is reported with the step") {
    CHECK_THROWS_AS(inner_adapt(model, task, 0, 0.1), std::invalid_argument);
    auto enc = encode(model.theta1(), task);
    enc.support.features[3] = std::nan("");
    try {
      inner_adapt(model.head(), model.phi(), enc.support, enc.class_weights, 3, 0.1);
      FAIL("expected divergence");
    } catch (const AdaptationDiverged& e) {
      CHECK(e.step() == 1);
    }
  }
}

TEST_CASE("second-order meta-gradient matches finite differences") {
  MamlConfig cfg;
  cfg.alpha = 0.5;
  for (int steps : {1, 2, 3}) {
    cfg.inner_steps = steps;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto inst = tiny_instance(seed, 2);
      const auto& head = inst.model.head();
      auto mg = meta_gradient(head, inst.model.phi(), inst.tasks, cfg);
      auto fd = oracle::central_difference(
          [&](const ParamVector& p) { return unrolled_query_loss(head, p, inst.tasks, cfg); },
          inst.model.phi(), 1e-5);
      CAPTURE(steps);
      CAPTURE(seed);
      CHECK(oracle::relative_error(mg.gradient.values, fd) < 1e-4);
      CHECK(mg.query_loss_sum == doctest::Approx(unrolled_query_loss(head, inst.model.phi(), inst.tasks, cfg)));
    }
  }
}

TEST_CASE("first and second order") {
  auto inst = tiny_instance(3, 1);
  const auto& head = inst.model.head();
  MamlConfig second, first;
  first.order = MetaOrder::kFirst;
  SUBCASE("coincide when alpha = 0") {
    second.alpha = first.alpha = 0.0;
    CHECK(meta_gradient(head, inst.model.phi(), inst.tasks, second).gradient ==
          meta_gradient(head, inst.model.phi(), inst.tasks, first).gradient);
  }
  SUBCASE("differ when alpha > 0") {
    second.alpha = first.alpha = 0.5;
    auto a = meta_gradient(head, inst.model.phi(), inst.tasks, second).gradient.values;
    auto b = meta_gradient(head, inst.model.phi(), inst.tasks, first).gradient.values;
    CHECK(oracle::relative_error(a, b) > 1e-3);
  }
  SUBCASE("first order uses the query gradient at the adapted point") {
    first.alpha = 0.5;
    auto adapted = inner_adapt(head, inst.model.phi(), inst.tasks[0].support, inst.tasks[0].class_weights,
                               first.inner_steps, first.alpha);
    ParamVector g;
    head_loss(head, adapted.phi, inst.tasks[0].query, inst.tasks[0].class_weights, &g);
    CHECK(meta_gradient(head, inst.model.phi(), inst.tasks, first).gradient == g);
  }
}

TEST_CASE("meta_update") {
  SyntheticTaskConfig sc;
  SyntheticTaskSource src(sc, 16, 8);
  auto model = SurrogateModel::create(sc.feature_dim, 8, sc.classes, 4);
  std::vector<FewShotTask> batch{src.train_task(0, 0), src.train_task(0, 1)};
  MamlConfig cfg;
  cfg.beta = 0.0;
  CHECK(meta_update(model, batch, cfg).phi == model.phi());
  cfg.beta = 0.01;
  CHECK_FALSE(meta_update(model, batch, cfg).phi == model.phi());
  CHECK_THROWS_AS(meta_update(model, {}, cfg), std::invalid_argument);
  auto wrong = SurrogateModel::create(sc.feature_dim, 8, 3, 4);
  CHECK_THROWS_AS(meta_update(wrong, batch, cfg), std::invalid_argument);
}

TEST_CASE("both orders reduce the query loss over 200 meta-updates") {
  SyntheticTaskConfig sc;
  sc.feature_dim = 6;
  sc.classes = 3;
  sc.train_tasks = 4;
  SyntheticTaskSource src(sc, 16, 8);
  for (auto order : {MetaOrder::kSecond, MetaOrder::kFirst}) {
    MamlConfig cfg;
    cfg.alpha = 0.1;
    cfg.beta = 0.05;
    cfg.epochs = 200;
    cfg.tasks_per_batch = 4;
    cfg.order = order;
    auto result = meta_train(SurrogateModel::create(6, 6, 3, 8), src, cfg);
    const auto& curve = result.epoch_query_loss;
    REQUIRE(curve.size() == 200);
    CAPTURE(to_string(order));
    CHECK(mean(curve, 190, 200) < mean(curve, 0, 10));
  }
}

TEST_CASE("meta_train") {
  SyntheticTaskConfig sc;
  SyntheticTaskSource src(sc, 32, 8);
  auto initial = SurrogateModel::create(sc.feature_dim, 32, sc.classes, 1);
  MamlConfig cfg;

  SUBCASE("zero epochs returns the initialization") {
    cfg.epochs = 0;
    auto r = meta_train(initial, src, cfg);
    CHECK(r.model.phi() == initial.phi());
    CHECK(r.epoch_query_loss.empty());
  }
  SUBCASE("seeded runs are bit-identical and leave theta1 alone") {
    cfg.epochs = 3;
    const auto before = checksum(initial.theta1().parameters());
    auto a = meta_train(initial, src, cfg);
    auto b = meta_train(initial, src, cfg);
    CHECK(a.model.phi() == b.model.phi());
    CHECK(a.epoch_query_loss == b.epoch_query_loss);
    CHECK(checksum(a.model.theta1().parameters()) == before);
    CHECK_FALSE(a.model.phi() == initial.phi());
  }
  SUBCASE("query loss falls on the synthetic distribution") {
    auto r = meta_train(initial, src, cfg);
    REQUIRE(r.epoch_query_loss.size() == 300);
    CHECK(mean(r.epoch_query_loss, 290, 300) < mean(r.epoch_query_loss, 0, 10));
  }
}

TEST_CASE("threaded meta-gradient is bit-identical to serial") {
  SyntheticTaskConfig sc;
  SyntheticTaskSource src(sc, 32, 8);
  auto model = SurrogateModel::create(sc.feature_dim, 16, sc.classes, 2);
  std::vector<EncodedTask> tasks;
  for (std::size_t i = 0; i < 7; ++i) tasks.push_back(encode(model.theta1(), src.train_task(1, i)));
  MamlConfig serial, threaded;
  threaded.threads = 3;
  auto a = meta_gradient(model.head(), model.phi(), tasks, serial);
  auto b = meta_gradient(model.head(), model.phi(), tasks, threaded);
  CHECK(a.gradient == b.gradient);
  CHECK(a.task_query_loss == b.task_query_loss);
}

TEST_CASE("meta_test_adapt") {
  SyntheticTaskConfig sc;
  SyntheticTaskSource src(sc, 32, 8);
  auto model = SurrogateModel::create(sc.feature_dim, 32, sc.classes, 1);
  MamlConfig cfg;

  SUBCASE("zero iterations evaluates the carried-over model") {
    cfg.test_iterations = 0;
    auto task = src.unseen_task(0);
    auto r = meta_test_adapt(model, task, cfg, 0);
    CHECK(r.phi == model.phi());
    REQUIRE(r.trace.size() == 1);
    auto enc = encode(model.theta1(), task);
    CHECK(r.query_loss == doctest::Approx(head_loss(model.head(), model.phi(), enc.query, enc.class_weights)));
    CHECK(r.query_accuracy == doctest::Approx(accuracy(model.head(), model.phi(), enc.query)));
  }
  SUBCASE("trace steps advance by N") {
    cfg.test_iterations = 4;
    auto r = meta_test_adapt(model, src.unseen_task(1), cfg, 0);
    REQUIRE(r.trace.size() == 5);
    for (std::size_t i = 0; i < r.trace.size(); ++i) CHECK(r.trace[i].step == 3 * static_cast<int>(i));
  }
  SUBCASE("a task with another class count gets a new classifier") {
    auto task = random_task(5, sc.feature_dim, 3, 20, 10);
    auto r = meta_test_adapt(model, task, cfg, 9);
    CHECK(r.head.classes == 3);
    CHECK(r.head.hidden_dim == model.head().hidden_dim);
    cfg.test_iterations = 0;
    auto r0 = meta_test_adapt(model, task, cfg, 9);
    const auto hidden = model.phi().layout.index_of(kHiddenWeights);
    const auto span_a = r0.phi.layer(r0.phi.layout.index_of(kHiddenWeights));
    const auto span_b = model.phi().layer(hidden);
    CHECK(std::equal(span_a.begin(), span_a.end(), span_b.begin(), span_b.end()));
  }
}

TEST_CASE("adapting to a meta-training task reaches 95% query accuracy") {
  // Noise-free frames with a slower decay, so the No-stroke boundary is learnable.
  SyntheticTaskConfig sc;
  sc.noise = 0.0;
  sc.decay_frames = 2.0;
  SyntheticTaskSource src(sc, 64, 32);
  MamlConfig cfg;
  cfg.alpha = 0.5;
  cfg.beta = 0.01;
  cfg.inner_steps = 5;
  cfg.epochs = 5;
  cfg.test_iterations = 100;
  auto trained = meta_train(SurrogateModel::create(sc.feature_dim, 32, sc.classes, 1), src, cfg);
  double total = 0.0;
  for (std::size_t i = 0; i < sc.train_tasks; ++i) {
    total += meta_test_adapt(trained.model, src.train_task(0, i), cfg, 0).query_accuracy;
  }
  CHECK(total / static_cast<double>(sc.train_tasks) >= 0.95);
}

TEST_CASE("synthetic task source") {
  SyntheticTaskConfig sc;
  SUBCASE("same seed gives the same stream") {
    SyntheticTaskSource a(sc, 32, 8), b(sc, 32, 8);
    for (std::size_t i = 0; i < 3; ++i) {
      auto ta = a.train_task(2, i), tb = b.train_task(2, i);
      REQUIRE(ta.support.size() == 32);
      REQUIRE(ta.query.size() == 8);
      for (std::size_t k = 0; k < ta.support.size(); ++k) {
        CHECK(ta.support[k].features == tb.support[k].features);
        CHECK(ta.support[k].label == tb.support[k].label);
      }
      CHECK(ta.class_weights == tb.class_weights);
    }
    CHECK(a.unseen_task(0).query[0].features == b.unseen_task(0).query[0].features);
    sc.seed = 8;
    SyntheticTaskSource c(sc, 32, 8);
    CHECK(c.train_task(2, 0).support[0].features != a.train_task(2, 0).support[0].features);
  }
  SUBCASE("pool tasks repeat with fresh samples each epoch") {
    SyntheticTaskSource s(sc, 32, 8);
    CHECK(s.train_task(0, 0).support[0].features != s.train_task(1, 0).support[0].features);
    CHECK(s.train_task(3, sc.train_tasks).support[0].features == s.train_task(3, 0).support[0].features);
  }
  SUBCASE("labels follow the decay rule") {
    sc.noise = 0.0;
    sc.frames_per_stroke = 8;
    sc.decay_frames = 1.0;
    SyntheticTaskSource s(sc, 64, 8);
    auto t = s.train_task(0, 0);
    int no_stroke = 0;
    for (const auto& smp : t.support) no_stroke += smp.label == 0;
    // Frames 4..7 of each 8-frame stroke fall under 3% of the peak.
    CHECK(no_stroke > 16);
    CHECK(no_stroke < 48);
  }
  SUBCASE("noise-free tasks are linearly separable") {
    sc.noise = 0.0;
    SyntheticTaskSource s(sc, 32, 8);
    HeadShape linear{sc.feature_dim, 0, sc.classes};
    for (std::size_t j = 0; j < 3; ++j) {
      auto enc = encode(FeatureMap::identity(sc.feature_dim), s.unseen_task(j));
      ParamVector zero(linear.layout());
      auto one = inner_adapt(linear, zero, enc.support, enc.class_weights, 1, 1.0);
      // Majority-class rate on the support set.
      std::vector<int> counts(sc.classes, 0);
      for (int l : enc.support.labels) ++counts[static_cast<std::size_t>(l)];
      const double majority = *std::max_element(counts.begin(), counts.end()) / static_cast<double>(enc.support.size());
      CHECK(accuracy(linear, one.phi, enc.support) > majority);
      auto many = inner_adapt(linear, zero, enc.support, enc.class_weights, 20000, 5.0);
      CHECK(accuracy(linear, many.phi, enc.support) == 1.0);
    }
  }
  SUBCASE("imbalance profile skews the stroke classes") {
    sc.classes = 3;
    sc.imbalance = {9.0, 1.0};
    SyntheticTaskSource s(sc, 200, 8);
    int c1 = 0, c2 = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      for (const auto& smp : s.train_task(0, i).support) {
        c1 += smp.label == 1;
        c2 += smp.label == 2;
      }
    }
    CHECK(c1 > 4 * c2);
  }
  SUBCASE("merging folds extra classes into Others") {
    sc.classes = 6;
    sc.merge_others = true;
    sc.keep_classes = 2;
    CHECK(sc.task_classes() == 4);
    SyntheticTaskSource s(sc, 64, 8);
    auto t = s.train_task(0, 0);
    CHECK(t.num_classes() == 4);
    for (const auto& smp : t.support) CHECK(smp.label < 4);
  }
  SUBCASE("invalid configs") {
    sc.classes = 1;
    CHECK_THROWS_AS(SyntheticTaskSource(sc, 32, 8), std::invalid_argument);
    sc.classes = 5;
    sc.imbalance = {1.0};
    CHECK_THROWS_AS(SyntheticTaskSource(sc, 32, 8), std::invalid_argument);
    sc.imbalance.clear();
    CHECK_THROWS_AS(SyntheticTaskSource(sc, 0, 8), std::invalid_argument);
  }
}

TEST_CASE("parameter files") {
  auto model = SurrogateModel::create(5, 4, 3, 6);
  std::stringstream buf;
  save_params(buf, model.phi());
  auto header = buf.str().substr(0, buf.str().find('\n'));
  CHECK(header.find("\"format\":\"taal-params\"") != std::string::npos);
  auto back = load_params(buf);
  CHECK(back == model.phi());
  CHECK(checksum(back.values) == checksum(model.phi().values));

  std::stringstream again;
  save_params(again, model.phi());
  auto text = again.str();
  std::stringstream cut(text.substr(0, text.size() - 3));
  CHECK_THROWS_AS(load_params(cut), std::runtime_error);
  std::stringstream garbage("{\"format\":\"other\"}\n");
  CHECK_THROWS_AS(load_params(garbage), std::runtime_error);
  std::stringstream empty;
  CHECK_THROWS_AS(load_params(empty), std::runtime_error);
}
