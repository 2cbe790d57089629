// Head forward/backward pass, generic over double and Dual so the same code
// yields gradients and Hessian-vector products.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dual.h"
#include "taal/meta/model.h"

namespace taal::meta::detail {

using std::exp;
using std::log;
using std::tanh;

struct HeadOffsets {
  std::size_t hidden_w = 0, hidden_b = 0, out_w = 0, out_b = 0;

  explicit HeadOffsets(const HeadShape& s) {
    std::size_t o = 0;
    if (s.has_hidden()) {
      hidden_w = o;
      o += s.hidden_dim * s.input_dim;
      hidden_b = o;
      o += s.hidden_dim;
    }
    out_w = o;
    o += s.classes * (s.has_hidden() ? s.hidden_dim : s.input_dim);
    out_b = o;
  }
};

// Returns the mean weighted cross-entropy; accumulates d loss / d phi into
// `grad` when it is non-empty (it must be zero-initialized).
template <class S>
S head_loss(const HeadShape& shape, std::span<const S> phi, const EncodedSet& set,
            std::span<const double> weights, std::span<S> grad) {
  const HeadOffsets off(shape);
  const std::size_t D = shape.input_dim;
  const std::size_t H = shape.has_hidden() ? shape.hidden_dim : D;
  const std::size_t C = shape.classes;
  const std::size_t T = set.size();
  const bool want_grad = !grad.empty();
  const double log_floor = std::log(kProbabilityFloor);
  const double inv_t = 1.0 / static_cast<double>(T);

  std::vector<S> h(H), z(C), dz(C), dh(H);
  S total = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    auto x = set.row(t);
    if (shape.has_hidden()) {
      for (std::size_t j = 0; j < H; ++j) {
        S a = phi[off.hidden_b + j];
        const S* w = &phi[off.hidden_w + j * D];
        for (std::size_t k = 0; k < D; ++k) a += w[k] * x[k];
        h[j] = tanh(a);
      }
    } else {
      for (std::size_t j = 0; j < H; ++j) h[j] = x[j];
    }
    std::size_t arg = 0;
    for (std::size_t c = 0; c < C; ++c) {
      S acc = phi[off.out_b + c];
      const S* w = &phi[off.out_w + c * H];
      for (std::size_t j = 0; j < H; ++j) acc += w[j] * h[j];
      z[c] = acc;
      if (value_of(z[c]) > value_of(z[arg])) arg = c;
    }
    const S shift = z[arg];
    S sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) sum += exp(z[c] - shift);
    const S lse = shift + log(sum);

    const auto y = static_cast<std::size_t>(set.labels[t]);
    const double wy = weights[y];
    const S logp = z[y] - lse;
    if (value_of(logp) < log_floor) {
      total += -wy * log_floor;
      continue;  // clipped: flat in phi
    }
    total += -wy * logp;
    if (!want_grad) continue;

    for (std::size_t c = 0; c < C; ++c) {
      S p = exp(z[c] - lse);
      dz[c] = (c == y ? p - 1.0 : p) * (wy * inv_t);
    }
    std::fill(dh.begin(), dh.end(), S(0.0));
    for (std::size_t c = 0; c < C; ++c) {
      grad[off.out_b + c] += dz[c];
      S* gw = &grad[off.out_w + c * H];
      const S* w = &phi[off.out_w + c * H];
      for (std::size_t j = 0; j < H; ++j) {
        gw[j] += dz[c] * h[j];
        dh[j] += dz[c] * w[j];
      }
    }
    if (shape.has_hidden()) {
      for (std::size_t j = 0; j < H; ++j) {
        S da = dh[j] * (1.0 - h[j] * h[j]);
        grad[off.hidden_b + j] += da;
        S* gw = &grad[off.hidden_w + j * D];
        for (std::size_t k = 0; k < D; ++k) gw[k] += da * x[k];
      }
    }
  }
  return total * inv_t;
}

}  // namespace taal::meta::detail
