#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "levelflow/errors.hpp"
#include "levelflow/linalg.hpp"
#include "levelflow/rng.hpp"

namespace levelflow {

//! Dense feedforward network with Tanh on hidden layers and an identity
//! output layer. weights[l] has shape (layer_dims[l+1] x layer_dims[l]),
//! biases[l] has length layer_dims[l+1].
struct MlpParams {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  std::size_t n_layers() const { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }

  bool operator==(const MlpParams&) const = default;

  void validate() const {
    if (layer_dims.size() < 2) throw ShapeError("MlpParams: need at least input and output dims");
    for (std::size_t d : layer_dims) {
      if (d == 0) throw ShapeError("MlpParams: zero layer dimension");
    }
    if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
      throw ShapeError("MlpParams: layer count mismatch");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows != layer_dims[l + 1] || weights[l].cols != layer_dims[l] ||
          biases[l].size() != layer_dims[l + 1]) {
        throw ShapeError("MlpParams: weight/bias shape mismatch");
      }
    }
  }

  //! Zero-initialized network of the given layout. Its forward pass is
  //! identically zero.
  static MlpParams zeros(std::vector<std::size_t> dims) {
    MlpParams p;
    p.layer_dims = std::move(dims);
    for (std::size_t l = 0; l + 1 < p.layer_dims.size(); ++l) {
      p.weights.emplace_back(p.layer_dims[l + 1], p.layer_dims[l]);
      p.biases.emplace_back(p.layer_dims[l + 1], 0.0);
    }
    p.validate();
    return p;
  }

  //! Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer for
  //! both weights and biases.
  static MlpParams random_init(std::vector<std::size_t> dims, Rng& rng) {
    MlpParams p = zeros(std::move(dims));
    for (std::size_t l = 0; l < p.n_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(p.layer_dims[l]));
      for (double& w : p.weights[l].data) w = rng.uniform(-bound, bound);
      for (double& b : p.biases[l]) b = rng.uniform(-bound, bound);
    }
    return p;
  }

  void set_zero() {
    for (auto& w : weights) w.set_zero();
    for (auto& b : biases) b.assign(b.size(), 0.0);
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.data.size();
    for (const auto& b : biases) n += b.size();
    return n;
  }

  //! Flat scalar access in layer order, weights before biases per layer.
  //! Used by the optimizer tests and finite-difference oracles.
  double& param_at(std::size_t idx) {
    for (std::size_t l = 0; l < n_layers(); ++l) {
      if (idx < weights[l].data.size()) return weights[l].data[idx];
      idx -= weights[l].data.size();
      if (idx < biases[l].size()) return biases[l][idx];
      idx -= biases[l].size();
    }
    throw ShapeError("MlpParams::param_at: index out of range");
  }

  double param_at(std::size_t idx) const { return const_cast<MlpParams&>(*this).param_at(idx); }
};

//! Reusable buffers for batched passes; acts[l] holds the batch entering
//! layer l, acts[n_layers] the network output.
struct MlpWorkspace {
  std::vector<Matrix> acts;
  std::vector<Matrix> weights_t;  // per-layer transposed weights
  Matrix delta;
  Matrix delta_prev;
  Matrix delta_t;
};

//! Batched forward pass: input is (batch x input_dim); on return
//! ws.acts.back() is (batch x output_dim).
inline void mlp_forward_batch(const MlpParams& p, const Matrix& input, MlpWorkspace& ws) {
  if (input.cols != p.input_dim()) throw ShapeError("mlp_forward_batch: input dim mismatch");
  const std::size_t layers = p.n_layers();
  ws.acts.resize(layers + 1);
  ws.weights_t.resize(layers);
  ws.acts[0] = input;
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = p.weights[l];
    transpose_into(w, ws.weights_t[l]);
    const Matrix& in = ws.acts[l];
    Matrix& out = ws.acts[l + 1];
    out.ensure_shape(in.rows, w.rows);
    const Vector& b = p.biases[l];
    for (std::size_t r = 0; r < in.rows; ++r) {
      double* o = out.row(r);
      for (std::size_t j = 0; j < w.rows; ++j) o[j] = b[j];
    }
    matmul_accum(in, ws.weights_t[l], out);
    if (l + 1 < layers) {
      for (double& v : out.data) v = std::tanh(v);
    }
  }
}

//! Batched reverse pass for the scalar sum_{b} <output_row_b, out_grad_row_b>.
//! Accumulates parameter gradients into grad (same layout as p, not cleared)
//! and, when input_grad is non-null, writes the gradient w.r.t. the input
//! batch. Requires the workspace of the matching forward pass.
inline void mlp_backward_batch(const MlpParams& p, MlpWorkspace& ws, const Matrix& out_grad,
                               MlpParams& grad, Matrix* input_grad = nullptr) {
  const std::size_t layers = p.n_layers();
  if (out_grad.rows != ws.acts[0].rows || out_grad.cols != p.output_dim()) {
    throw ShapeError("mlp_backward_batch: output gradient shape mismatch");
  }
  ws.delta = out_grad;
  for (std::size_t li = layers; li-- > 0;) {
    Matrix& delta = ws.delta;
    // acts[li + 1] went through tanh unless it is the network output.
    if (li + 1 < layers) {
      const Matrix& a = ws.acts[li + 1];
      for (std::size_t i = 0; i < delta.data.size(); ++i) {
        delta.data[i] *= 1.0 - a.data[i] * a.data[i];
      }
    }
    Matrix& gw = grad.weights[li];
    Vector& gb = grad.biases[li];
    const Matrix& a_in = ws.acts[li];
    transpose_into(delta, ws.delta_t);
    matmul_accum(ws.delta_t, a_in, gw);
    for (std::size_t r = 0; r < delta.rows; ++r) {
      const double* dr = delta.row(r);
      for (std::size_t j = 0; j < delta.cols; ++j) gb[j] += dr[j];
    }
    const bool need_prev = li > 0 || input_grad != nullptr;
    if (!need_prev) break;
    Matrix& prev = ws.delta_prev;
    prev.resize(delta.rows, a_in.cols);
    matmul_accum(delta, p.weights[li], prev);
    if (li == 0) {
      if (input_grad) *input_grad = prev;
    } else {
      std::swap(ws.delta, ws.delta_prev);
    }
  }
}

//! Forward pass on a single input vector.
inline Vector mlp_forward(const MlpParams& p, const Vector& input) {
  if (input.size() != p.input_dim()) throw ShapeError("mlp_forward: input dim mismatch");
  Vector cur = input;
  Vector next;
  const std::size_t layers = p.n_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = p.weights[l];
    next.assign(w.rows, 0.0);
    for (std::size_t j = 0; j < w.rows; ++j) {
      double v = dot(cur.data(), w.row(j), w.cols) + p.biases[l][j];
      next[j] = (l + 1 < layers) ? std::tanh(v) : v;
    }
    cur.swap(next);
  }
  return cur;
}

struct MlpBackwardResult {
  MlpParams param_grads;
  Vector input_grad;
};

//! Exact reverse-mode gradients of <output, output_gradient> with respect to
//! every parameter and to the input vector.
inline MlpBackwardResult mlp_backward(const MlpParams& p, const Vector& input,
                                      const Vector& output_gradient) {
  if (input.size() != p.input_dim()) throw ShapeError("mlp_backward: input dim mismatch");
  if (output_gradient.size() != p.output_dim()) {
    throw ShapeError("mlp_backward: output gradient dim mismatch");
  }
  MlpWorkspace ws;
  Matrix in(1, input.size());
  std::copy(input.begin(), input.end(), in.data.begin());
  mlp_forward_batch(p, in, ws);
  Matrix og(1, output_gradient.size());
  std::copy(output_gradient.begin(), output_gradient.end(), og.data.begin());
  MlpBackwardResult res;
  res.param_grads = MlpParams::zeros(p.layer_dims);
  Matrix ig;
  mlp_backward_batch(p, ws, og, res.param_grads, &ig);
  res.input_grad.assign(ig.data.begin(), ig.data.end());
  return res;
}

}  // namespace levelflow
