#pragma once

#include <cmath>
#include <cstddef>

#include "levelflow/errors.hpp"
#include "levelflow/mlp.hpp"

namespace levelflow {

//! Adam optimizer state for one MlpParams-shaped parameter set. Moments start
//! at zero; step_count increments by exactly one per update.
struct AdamState {
  std::size_t step_count = 0;
  MlpParams first_moment;
  MlpParams second_moment;
  double learning_rate = 1.0e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1.0e-8;
  double weight_decay = 0.0;

  static AdamState for_params(const MlpParams& p, double lr = 1.0e-3,
                              double weight_decay = 0.0) {
    AdamState s;
    s.first_moment = MlpParams::zeros(p.layer_dims);
    s.second_moment = MlpParams::zeros(p.layer_dims);
    s.learning_rate = lr;
    s.weight_decay = weight_decay;
    return s;
  }
};

namespace detail {

inline void adam_update_span(double* p, const double* g, double* m, double* v, std::size_t n,
                             const AdamState& s, double bc1, double bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(g[i])) throw NumericalError("adam_step: non-finite gradient entry");
    // Coupled weight decay: the decay term joins the gradient before the
    // moment updates, matching the reference optimizer's L2 semantics.
    const double grad = g[i] + s.weight_decay * p[i];
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad;
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad * grad;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= s.learning_rate * mhat / (std::sqrt(vhat) + s.epsilon);
  }
}

}  // namespace detail

//! One bias-corrected Adam update, in place.
inline void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
  if (grads.layer_dims != params.layer_dims) throw ShapeError("adam_step: gradient layout mismatch");
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < params.n_layers(); ++l) {
    detail::adam_update_span(params.weights[l].data.data(), grads.weights[l].data.data(),
                             state.first_moment.weights[l].data.data(),
                             state.second_moment.weights[l].data.data(),
                             params.weights[l].data.size(), state, bc1, bc2);
    detail::adam_update_span(params.biases[l].data(), grads.biases[l].data(),
                             state.first_moment.biases[l].data(),
                             state.second_moment.biases[l].data(), params.biases[l].size(), state,
                             bc1, bc2);
  }
}

}  // namespace levelflow
