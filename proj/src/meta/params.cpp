#include "taal/meta/params.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace taal::meta {

ParamLayout::ParamLayout(std::vector<LayerShape> layers) : layers_(std::move(layers)) {
  offsets_.reserve(layers_.size());
  for (const auto& l : layers_) {
    offsets_.push_back(total_);
    total_ += l.size();
  }
}

std::size_t ParamLayout::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].name == name) return i;
  }
  throw std::out_of_range("no layer named '" + name + "'");
}

bool ParamVector::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ParamVector sgd_step(const ParamVector& params, const ParamVector& gradient, double lr) {
  if (!(params.layout == gradient.layout) || params.size() != gradient.size()) {
    throw std::invalid_argument("parameter and gradient layouts differ");
  }
  if (!gradient.all_finite()) throw std::invalid_argument("non-finite gradient");
  ParamVector out = params;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= lr * gradient.values[i];
  return out;
}

std::uint64_t checksum(std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void save_params(std::ostream& out, const ParamVector& params) {
  nlohmann::ordered_json header;
  header["format"] = "taal-params";
  header["version"] = 1;
  header["dtype"] = "float64-le";
  header["count"] = params.size();
  auto layers = nlohmann::ordered_json::array();
  for (const auto& l : params.layout.layers()) {
    layers.push_back({{"name", l.name}, {"rows", l.rows}, {"cols", l.cols}});
  }
  header["layout"] = layers;
  out << header.dump() << '\n';
  for (double v : params.values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    out.write(bytes, 8);
  }
}

ParamVector load_params(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing parameter header");
  auto header = nlohmann::json::parse(line);
  if (header.at("format") != "taal-params" || header.at("version") != 1 ||
      header.at("dtype") != "float64-le") {
    throw std::runtime_error("unsupported parameter file");
  }
  std::vector<LayerShape> layers;
  for (const auto& l : header.at("layout")) {
    layers.push_back({l.at("name").get<std::string>(), l.at("rows").get<std::size_t>(),
                      l.at("cols").get<std::size_t>()});
  }
  ParamVector p{ParamLayout(std::move(layers))};
  if (header.at("count").get<std::size_t>() != p.size()) {
    throw std::runtime_error("parameter count does not match layout");
  }
  for (auto& v : p.values) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
      throw std::runtime_error("truncated parameter file");
    }
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
  }
  return p;
}

}  // namespace taal::meta
