// Flat trainable parameter store with a per-layer layout.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace taal::meta {

struct LayerShape {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(std::vector<LayerShape> layers);

  const std::vector<LayerShape>& layers() const { return layers_; }
  std::size_t offset(std::size_t layer) const { return offsets_.at(layer); }
  std::size_t total() const { return total_; }
  /// Index of the layer with this name; throws std::out_of_range.
  std::size_t index_of(const std::string& name) const;

  friend bool operator==(const ParamLayout& a, const ParamLayout& b) {
    return a.layers_ == b.layers_;
  }

 private:
  std::vector<LayerShape> layers_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

struct ParamVector {
  ParamLayout layout;
  std::vector<double> values;

  ParamVector() = default;
  explicit ParamVector(ParamLayout l) : layout(std::move(l)), values(layout.total(), 0.0) {}

  std::span<double> layer(std::size_t i) {
    return std::span<double>(values).subspan(layout.offset(i), layout.layers()[i].size());
  }
  std::span<const double> layer(std::size_t i) const {
    return std::span<const double>(values).subspan(layout.offset(i), layout.layers()[i].size());
  }
  std::size_t size() const { return values.size(); }
  bool all_finite() const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// params - lr * gradient. Throws std::invalid_argument on a layout mismatch
/// or a non-finite gradient entry.
ParamVector sgd_step(const ParamVector& params, const ParamVector& gradient, double lr);

/// FNV-1a over the raw bytes of `values`.
std::uint64_t checksum(std::span<const double> values);

/// Binary parameter file: one line of JSON describing the layout, then
/// `count` little-endian IEEE-754 doubles.
void save_params(std::ostream& out, const ParamVector& params);
ParamVector load_params(std::istream& in);

}  // namespace taal::meta
