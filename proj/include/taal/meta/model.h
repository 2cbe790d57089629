// Surrogate stroke classifier: a frozen feature map (theta1) followed by a
// trainable head phi = [hidden dense layer, softmax classifier].

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "taal/meta/params.h"

namespace taal::meta {

/// Per-frame class scores stored frame-major: value(c, t) = values[t * classes + c].
struct FrameMatrix {
  std::size_t classes = 0;
  std::size_t frames = 0;
  std::vector<double> values;

  FrameMatrix() = default;
  FrameMatrix(std::size_t c, std::size_t t) : classes(c), frames(t), values(c * t, 0.0) {}
  double& operator()(std::size_t c, std::size_t t) { return values[t * classes + c]; }
  double operator()(std::size_t c, std::size_t t) const { return values[t * classes + c]; }
};

inline constexpr double kProbabilityFloor = 1e-12;

/// Weighted categorical cross-entropy averaged over frames:
/// -(1/T) sum_t sum_c w_c y[c,t] log(max(p[c,t], 1e-12)).
/// Throws std::invalid_argument on shape mismatch or non-finite input.
double wce_loss(const FrameMatrix& predictions, const FrameMatrix& targets,
                std::span<const double> weights);

/// Same loss from raw scores via a stabilized log-softmax.
double wce_loss_from_logits(const FrameMatrix& logits, const FrameMatrix& targets,
                            std::span<const double> weights);

/// w_c = total / (C * count_c); zero-count classes get the largest computed
/// weight; the result is rescaled to mean 1. Throws if all counts are zero.
std::vector<double> class_weights(std::span<const int> frame_counts);

/// Unnormalized form of class_weights (before the mean-1 rescaling).
std::vector<double> raw_class_weights(std::span<const int> frame_counts);

struct Sample {
  std::vector<double> features;
  int label = 0;
};

struct FewShotTask {
  std::vector<Sample> support;
  std::vector<Sample> query;
  std::vector<double> class_weights;

  std::size_t num_classes() const { return class_weights.size(); }
  /// Throws std::invalid_argument when a set is empty, a label is out of
  /// range or a weight is not positive.
  void validate() const;
};

/// Frozen theta1. Either a seeded random projection followed by tanh, or the
/// identity (used for the convex linear sub-case).
class FeatureMap {
 public:
  static FeatureMap random(std::size_t input_dim, std::size_t output_dim, std::uint64_t seed);
  static FeatureMap identity(std::size_t dim);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  bool is_identity() const { return identity_; }

  void apply(std::span<const double> x, std::span<double> out) const;
  /// Weights then bias, for checksumming the frozen contract.
  std::vector<double> parameters() const;

 private:
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  bool identity_ = false;
  std::vector<double> weights_;  // output_dim x input_dim
  std::vector<double> bias_;
};

/// Head dimensions. hidden_dim == 0 drops the hidden layer (linear head).
struct HeadShape {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t classes = 0;

  ParamLayout layout() const;
  bool has_hidden() const { return hidden_dim > 0; }
  friend bool operator==(const HeadShape&, const HeadShape&) = default;
};

/// Layer names used in head layouts.
inline constexpr const char* kHiddenWeights = "hidden.weight";
inline constexpr const char* kHiddenBias = "hidden.bias";
inline constexpr const char* kClassifierWeights = "classifier.weight";
inline constexpr const char* kClassifierBias = "classifier.bias";

/// Gaussian weights with variance 1/fan_in, zero biases.
ParamVector init_head(const HeadShape& shape, std::uint64_t seed);

/// Keeps the hidden layer and replaces the classifier by a freshly
/// initialized one with `classes` outputs.
ParamVector resize_classifier(const ParamVector& phi, const HeadShape& shape, std::size_t classes,
                              std::uint64_t seed);

/// Samples pushed through theta1 once; the head only ever sees these.
struct EncodedSet {
  std::size_t dim = 0;
  std::vector<double> features;  // count x dim
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }
};

EncodedSet encode(const FeatureMap& theta1, std::span<const Sample> samples);

/// Mean weighted cross-entropy of the head over `set`; when `gradient` is
/// non-null it receives d loss / d phi.
double head_loss(const HeadShape& shape, const ParamVector& phi, const EncodedSet& set,
                 std::span<const double> weights, ParamVector* gradient = nullptr);

/// Hessian-vector product H(phi) * direction of head_loss, exact to rounding
/// (forward-mode differentiation of the analytic gradient).
ParamVector head_hvp(const HeadShape& shape, const ParamVector& phi, const EncodedSet& set,
                     std::span<const double> weights, const ParamVector& direction);

/// Softmax outputs, C x T.
FrameMatrix predict_proba(const HeadShape& shape, const ParamVector& phi, const EncodedSet& set);

/// Fraction of samples whose argmax prediction equals the label.
double accuracy(const HeadShape& shape, const ParamVector& phi, const EncodedSet& set);

class SurrogateModel {
 public:
  SurrogateModel(FeatureMap theta1, HeadShape head, ParamVector phi);

  /// Random tanh feature map of width `hidden_dim` feeding a head with one
  /// hidden layer of the same width.
  static SurrogateModel create(std::size_t feature_dim, std::size_t hidden_dim,
                               std::size_t classes, std::uint64_t seed);

  const FeatureMap& theta1() const { return theta1_; }
  const HeadShape& head() const { return head_; }
  const ParamVector& phi() const { return phi_; }
  void set_phi(ParamVector phi);

  /// New model sharing theta1 and the hidden layer, with a re-initialized
  /// classifier for `classes` outputs.
  SurrogateModel with_classes(std::size_t classes, std::uint64_t seed) const;

 private:
  FeatureMap theta1_;
  HeadShape head_;
  ParamVector phi_;
};

}  // namespace taal::meta
