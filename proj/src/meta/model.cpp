#include "taal/meta/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "head_math.h"
#include "taal/random.h"

namespace taal::meta {
namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string("non-finite value in ") + what);
  }
}

void check_loss_inputs(const FrameMatrix& a, const FrameMatrix& targets,
                       std::span<const double> weights) {
  if (a.classes != targets.classes || a.frames != targets.frames ||
      a.values.size() != a.classes * a.frames || targets.values.size() != a.values.size()) {
    throw std::invalid_argument("prediction/target shape mismatch");
  }
  if (weights.size() != a.classes) throw std::invalid_argument("weight count != class count");
  if (a.frames == 0) throw std::invalid_argument("no frames");
  check_finite(a.values, "predictions");
  check_finite(targets.values, "targets");
  check_finite(weights, "weights");
}

void fill_gaussian(std::span<double> out, double stddev, Rng& rng) {
  for (auto& v : out) v = stddev * standard_normal(rng);
}

void check_head(const HeadShape& shape, const ParamVector& phi) {
  if (!(phi.layout == shape.layout())) throw std::invalid_argument("phi layout does not match head");
}

void check_set(const HeadShape& shape, const EncodedSet& set, std::span<const double> weights) {
  if (set.size() == 0) throw std::invalid_argument("empty sample set");
  if (set.dim != shape.input_dim) throw std::invalid_argument("feature dim does not match head");
  if (weights.size() != shape.classes) throw std::invalid_argument("weight count != class count");
  for (int y : set.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= shape.classes) {
      throw std::invalid_argument("label out of range");
    }
  }
}

}  // namespace

double wce_loss(const FrameMatrix& predictions, const FrameMatrix& targets,
                std::span<const double> weights) {
  check_loss_inputs(predictions, targets, weights);
  double total = 0.0;
  for (std::size_t t = 0; t < predictions.frames; ++t) {
    for (std::size_t c = 0; c < predictions.classes; ++c) {
      const double y = targets(c, t);
      if (y == 0.0) continue;
      total -= weights[c] * y * std::log(std::max(predictions(c, t), kProbabilityFloor));
    }
  }
  return total / static_cast<double>(predictions.frames);
}

double wce_loss_from_logits(const FrameMatrix& logits, const FrameMatrix& targets,
                            std::span<const double> weights) {
  check_loss_inputs(logits, targets, weights);
  const double log_floor = std::log(kProbabilityFloor);
  double total = 0.0;
  for (std::size_t t = 0; t < logits.frames; ++t) {
    double mx = logits(0, t);
    for (std::size_t c = 1; c < logits.classes; ++c) mx = std::max(mx, logits(c, t));
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.classes; ++c) sum += std::exp(logits(c, t) - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t c = 0; c < logits.classes; ++c) {
      const double y = targets(c, t);
      if (y == 0.0) continue;
      total -= weights[c] * y * std::max(logits(c, t) - lse, log_floor);
    }
  }
  return total / static_cast<double>(logits.frames);
}

std::vector<double> raw_class_weights(std::span<const int> frame_counts) {
  if (frame_counts.empty()) throw std::invalid_argument("no classes");
  long long total = 0;
  for (int c : frame_counts) {
    if (c < 0) throw std::invalid_argument("negative frame count");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("all class frame counts are zero");
  const double C = static_cast<double>(frame_counts.size());
  std::vector<double> w(frame_counts.size(), 0.0);
  double max_w = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (frame_counts[i] > 0) {
      w[i] = static_cast<double>(total) / (C * frame_counts[i]);
      max_w = std::max(max_w, w[i]);
    }
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (frame_counts[i] == 0) w[i] = max_w;
  }
  return w;
}

std::vector<double> class_weights(std::span<const int> frame_counts) {
  auto w = raw_class_weights(frame_counts);
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  for (auto& x : w) x /= mean;
  return w;
}

void FewShotTask::validate() const {
  if (support.empty() || query.empty()) throw std::invalid_argument("task needs support and query samples");
  if (class_weights.empty()) throw std::invalid_argument("task has no classes");
  for (double w : class_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("class weights must be positive");
  }
  const std::size_t dim = support.front().features.size();
  auto check = [&](const std::vector<Sample>& set) {
    for (const auto& s : set) {
      if (s.label < 0 || static_cast<std::size_t>(s.label) >= class_weights.size()) {
        throw std::invalid_argument("label out of range");
      }
      if (s.features.size() != dim) throw std::invalid_argument("inconsistent feature dim");
    }
  };
  check(support);
  check(query);
}

FeatureMap FeatureMap::random(std::size_t input_dim, std::size_t output_dim, std::uint64_t seed) {
  if (input_dim == 0 || output_dim == 0) throw std::invalid_argument("feature map dims must be positive");
  FeatureMap f;
  f.input_dim_ = input_dim;
  f.output_dim_ = output_dim;
  f.weights_.resize(input_dim * output_dim);
  f.bias_.resize(output_dim);
  Rng rng(seed);
  fill_gaussian(f.weights_, 1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
  fill_gaussian(f.bias_, 0.1, rng);
  return f;
}

FeatureMap FeatureMap::identity(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("feature map dims must be positive");
  FeatureMap f;
  f.input_dim_ = dim;
  f.output_dim_ = dim;
  f.identity_ = true;
  return f;
}

void FeatureMap::apply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != input_dim_ || out.size() != output_dim_) {
    throw std::invalid_argument("feature map dimension mismatch");
  }
  if (identity_) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  for (std::size_t j = 0; j < output_dim_; ++j) {
    double a = bias_[j];
    for (std::size_t k = 0; k < input_dim_; ++k) a += weights_[j * input_dim_ + k] * x[k];
    out[j] = std::tanh(a);
  }
}

std::vector<double> FeatureMap::parameters() const {
  std::vector<double> out = weights_;
  out.insert(out.end(), bias_.begin(), bias_.end());
  return out;
}

ParamLayout HeadShape::layout() const {
  std::vector<LayerShape> layers;
  std::size_t width = input_dim;
  if (has_hidden()) {
    layers.push_back({kHiddenWeights, hidden_dim, input_dim});
    layers.push_back({kHiddenBias, hidden_dim, 1});
    width = hidden_dim;
  }
  layers.push_back({kClassifierWeights, classes, width});
  layers.push_back({kClassifierBias, classes, 1});
  return ParamLayout(std::move(layers));
}

ParamVector init_head(const HeadShape& shape, std::uint64_t seed) {
  if (shape.input_dim == 0 || shape.classes == 0) throw std::invalid_argument("head dims must be positive");
  ParamVector phi(shape.layout());
  Rng rng(seed);
  for (std::size_t i = 0; i < phi.layout.layers().size(); ++i) {
    const auto& l = phi.layout.layers()[i];
    if (l.name == kHiddenWeights || l.name == kClassifierWeights) {
      fill_gaussian(phi.layer(i), 1.0 / std::sqrt(static_cast<double>(l.cols)), rng);
    }
  }
  return phi;
}

ParamVector resize_classifier(const ParamVector& phi, const HeadShape& shape, std::size_t classes,
                              std::uint64_t seed) {
  check_head(shape, phi);
  HeadShape resized = shape;
  resized.classes = classes;
  ParamVector out = init_head(resized, seed);
  if (shape.has_hidden()) {
    for (const char* name : {kHiddenWeights, kHiddenBias}) {
      auto src = phi.layer(phi.layout.index_of(name));
      auto dst = out.layer(out.layout.index_of(name));
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return out;
}

EncodedSet encode(const FeatureMap& theta1, std::span<const Sample> samples) {
  EncodedSet set;
  set.dim = theta1.output_dim();
  set.features.resize(samples.size() * set.dim);
  set.labels.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    theta1.apply(samples[i].features,
                 std::span<double>(set.features).subspan(i * set.dim, set.dim));
    set.labels.push_back(samples[i].label);
  }
  return set;
}

double head_loss(const HeadShape& shape, const ParamVector& phi, const EncodedSet& set,
                 std::span<const double> weights, ParamVector* gradient) {
  check_head(shape, phi);
  check_set(shape, set, weights);
  std::span<double> grad;
  if (gradient != nullptr) {
    *gradient = ParamVector(phi.layout);
    grad = gradient->values;
  }
  return detail::head_loss<double>(shape, phi.values, set, weights, grad);
}

ParamVector head_hvp(const HeadShape& shape, const ParamVector& phi, const EncodedSet& set,
                     std::span<const double> weights, const ParamVector& direction) {
  check_head(shape, phi);
  check_set(shape, set, weights);
  if (!(direction.layout == phi.layout)) throw std::invalid_argument("direction layout mismatch");
  std::vector<Dual> p(phi.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = Dual(phi.values[i], direction.values[i]);
  std::vector<Dual> g(phi.size());
  detail::head_loss<Dual>(shape, p, set, weights, g);
  ParamVector out(phi.layout);
  for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = g[i].d;
  return out;
}

FrameMatrix predict_proba(const HeadShape& shape, const ParamVector& phi, const EncodedSet& set) {
  check_head(shape, phi);
  const detail::HeadOffsets off(shape);
  const std::size_t D = shape.input_dim;
  const std::size_t H = shape.has_hidden() ? shape.hidden_dim : D;
  const std::size_t C = shape.classes;
  FrameMatrix out(C, set.size());
  std::vector<double> h(H), z(C);
  const auto& w = phi.values;
  for (std::size_t t = 0; t < set.size(); ++t) {
    auto x = set.row(t);
    for (std::size_t j = 0; j < H; ++j) {
      if (shape.has_hidden()) {
        double a = w[off.hidden_b + j];
        for (std::size_t k = 0; k < D; ++k) a += w[off.hidden_w + j * D + k] * x[k];
        h[j] = std::tanh(a);
      } else {
        h[j] = x[j];
      }
    }
    for (std::size_t c = 0; c < C; ++c) {
      double acc = w[off.out_b + c];
      for (std::size_t j = 0; j < H; ++j) acc += w[off.out_w + c * H + j] * h[j];
      z[c] = acc;
    }
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) sum += std::exp(z[c] - mx);
    for (std::size_t c = 0; c < C; ++c) out(c, t) = std::exp(z[c] - mx) / sum;
  }
  return out;
}

double accuracy(const HeadShape& shape, const ParamVector& phi, const EncodedSet& set) {
  if (set.size() == 0) return 0.0;
  auto p = predict_proba(shape, phi, set);
  std::size_t correct = 0;
  for (std::size_t t = 0; t < set.size(); ++t) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < p.classes; ++c) {
      if (p(c, t) > p(arg, t)) arg = c;
    }
    if (static_cast<int>(arg) == set.labels[t]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

SurrogateModel::SurrogateModel(FeatureMap theta1, HeadShape head, ParamVector phi)
    : theta1_(std::move(theta1)), head_(head), phi_(std::move(phi)) {
  if (head_.input_dim != theta1_.output_dim()) {
    throw std::invalid_argument("head input dim does not match feature map");
  }
  check_head(head_, phi_);
}

SurrogateModel SurrogateModel::create(std::size_t feature_dim, std::size_t hidden_dim,
                                      std::size_t classes, std::uint64_t seed) {
  auto theta1 = FeatureMap::random(feature_dim, hidden_dim, derive_seed(seed, 1));
  HeadShape head{hidden_dim, hidden_dim, classes};
  auto phi = init_head(head, derive_seed(seed, 2));
  return SurrogateModel(std::move(theta1), head, std::move(phi));
}

void SurrogateModel::set_phi(ParamVector phi) {
  check_head(head_, phi);
  phi_ = std::move(phi);
}

SurrogateModel SurrogateModel::with_classes(std::size_t classes, std::uint64_t seed) const {
  HeadShape resized = head_;
  resized.classes = classes;
  return SurrogateModel(theta1_, resized, resize_classifier(phi_, head_, classes, seed));
}

}  // namespace taal::meta
