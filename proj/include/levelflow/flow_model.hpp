#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levelflow/adam.hpp"
#include "levelflow/cv_map.hpp"
#include "levelflow/dataset.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/mlp.hpp"
#include "levelflow/rng.hpp"

namespace levelflow {

//! Per-dimension standardization statistics; std entries strictly positive.
struct NormStats {
  Vector mean;
  Vector std;

  static NormStats identity(std::size_t n) {
    NormStats s;
    s.mean.assign(n, 0.0);
    s.std.assign(n, 1.0);
    return s;
  }

  //! Empirical statistics with a floor that maps a degenerate (constant)
  //! dimension to unit scale, keeping standardization invertible.
  static NormStats from_data(const Matrix& rows) {
    NormStats s;
    const std::size_t n = rows.cols;
    s.mean.assign(n, 0.0);
    s.std.assign(n, 0.0);
    if (rows.rows == 0) throw ShapeError("NormStats::from_data: empty data");
    for (std::size_t r = 0; r < rows.rows; ++r) {
      for (std::size_t c = 0; c < n; ++c) s.mean[c] += rows(r, c);
    }
    for (double& v : s.mean) v /= static_cast<double>(rows.rows);
    for (std::size_t r = 0; r < rows.rows; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const double dlt = rows(r, c) - s.mean[c];
        s.std[c] += dlt * dlt;
      }
    }
    for (double& v : s.std) {
      v = std::sqrt(v / static_cast<double>(rows.rows));
      if (!(v > 1.0e-12)) v = 1.0;
    }
    return s;
  }

  bool operator==(const NormStats&) const = default;
};

//! CV-conditioned vector field v^(z)(x, t): a feedforward network over the
//! standardized state, the raw time scalar and the standardized condition.
struct FlowModel {
  MlpParams net;  // input dim d + 1 + k, output dim d
  NormStats x_stats;
  NormStats z_stats;
  std::size_t d = 0;
  std::size_t k = 0;

  void validate() const {
    net.validate();
    if (net.input_dim() != d + 1 + k || net.output_dim() != d) {
      throw ShapeError("FlowModel: network layout does not match (d, k)");
    }
    if (x_stats.mean.size() != d || x_stats.std.size() != d || z_stats.mean.size() != k ||
        z_stats.std.size() != k) {
      throw ShapeError("FlowModel: statistics dimension mismatch");
    }
    for (double s : x_stats.std) {
      if (!(s > 0.0)) throw ShapeError("FlowModel: non-positive x std");
    }
    for (double s : z_stats.std) {
      if (!(s > 0.0)) throw ShapeError("FlowModel: non-positive z std");
    }
  }

  static FlowModel make(std::size_t d, std::size_t k, const std::vector<std::size_t>& hidden,
                        Rng& rng) {
    FlowModel fm;
    fm.d = d;
    fm.k = k;
    std::vector<std::size_t> dims;
    dims.push_back(d + 1 + k);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(d);
    fm.net = MlpParams::random_init(std::move(dims), rng);
    fm.x_stats = NormStats::identity(d);
    fm.z_stats = NormStats::identity(k);
    return fm;
  }

  //! Field value in original coordinates; wraps the standardized network.
  Vector velocity(std::span<const double> x, double t, std::span<const double> z) const {
    Vector in(d + 1 + k);
    for (std::size_t i = 0; i < d; ++i) in[i] = (x[i] - x_stats.mean[i]) / x_stats.std[i];
    in[d] = t;
    for (std::size_t j = 0; j < k; ++j) in[d + 1 + j] = (z[j] - z_stats.mean[j]) / z_stats.std[j];
    Vector v = mlp_forward(net, in);
    for (std::size_t i = 0; i < d; ++i) v[i] *= x_stats.std[i];
    return v;
  }
};

//! A mini-batch of data points with the caller-attached CV values, both in
//! original (unstandardized) units.
struct FlowBatch {
  Matrix x;  // batch x d
  Matrix z;  // batch x k
};

struct TrainConfig {
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  double learning_rate = 1.0e-3;
  double weight_decay = 0.0;
  std::optional<std::size_t> patience;
  std::uint64_t seed = 0;
};

namespace detail {

struct FlowLossWorkspace {
  Matrix input;     // batch x (d + 1 + k)
  Matrix residual;  // batch x d
  MlpWorkspace mlp;
};

//! Empirical flow-matching objective with the draws (t_n, X0_n) supplied by
//! the caller; X0 lives in the standardized state space. Returns the mean
//! squared residual and accumulates parameter gradients into grad when
//! non-null. Exact identity: partitioning the batch and recombining with
//! batch-size weights reproduces this value for the same draws.
inline double fm_loss_batch_with_draws(const FlowModel& model, const FlowBatch& batch,
                                       std::span<const double> ts, const Matrix& x0,
                                       MlpParams* grad, FlowLossWorkspace& ws) {
  const std::size_t b = batch.x.rows;
  const std::size_t d = model.d;
  const std::size_t k = model.k;
  if (batch.x.cols != d || batch.z.rows != b || batch.z.cols != k || ts.size() != b ||
      x0.rows != b || x0.cols != d) {
    throw ShapeError("fm_loss_batch: inconsistent batch shapes");
  }
  ws.input.resize(b, d + 1 + k);
  for (std::size_t n = 0; n < b; ++n) {
    const double t = ts[n];
    double* row = ws.input.row(n);
    const double* xn = batch.x.row(n);
    const double* x0n = x0.row(n);
    for (std::size_t i = 0; i < d; ++i) {
      const double x1 = (xn[i] - model.x_stats.mean[i]) / model.x_stats.std[i];
      row[i] = (1.0 - t) * x0n[i] + t * x1;
    }
    row[d] = t;
    const double* zn = batch.z.row(n);
    for (std::size_t j = 0; j < k; ++j) {
      row[d + 1 + j] = (zn[j] - model.z_stats.mean[j]) / model.z_stats.std[j];
    }
  }
  mlp_forward_batch(model.net, ws.input, ws.mlp);
  const Matrix& v = ws.mlp.acts.back();

  ws.residual.resize(b, d);
  double loss = 0.0;
  for (std::size_t n = 0; n < b; ++n) {
    const double* xn = batch.x.row(n);
    const double* x0n = x0.row(n);
    const double* vn = v.row(n);
    double* rn = ws.residual.row(n);
    for (std::size_t i = 0; i < d; ++i) {
      const double x1 = (xn[i] - model.x_stats.mean[i]) / model.x_stats.std[i];
      rn[i] = vn[i] - (x1 - x0n[i]);
      loss += rn[i] * rn[i];
    }
  }
  loss /= static_cast<double>(b);
  if (!std::isfinite(loss)) throw NumericalError("fm_loss_batch: non-finite loss");

  if (grad) {
    const double scale = 2.0 / static_cast<double>(b);
    for (double& r : ws.residual.data) r *= scale;
    mlp_backward_batch(model.net, ws.mlp, ws.residual, *grad);
  }
  return loss;
}

}  // namespace detail

//! Empirical flow-matching objective over one batch: per point draws
//! t ~ U([0,1]) followed by a standard Gaussian X0 (d normals, in this
//! order), forms the interpolant (1-t) X0 + t X1 in standardized space and
//! regresses the network against X1 - X0. Returns the mean squared residual
//! and the exact parameter gradients.
inline std::pair<double, MlpParams> fm_loss_batch(const FlowModel& model, const FlowBatch& batch,
                                                  Rng& rng) {
  const std::size_t b = batch.x.rows;
  Vector ts(b);
  Matrix x0(b, model.d);
  for (std::size_t n = 0; n < b; ++n) {
    ts[n] = rng.uniform01();
    rng.fill_normal(x0.row(n), model.d);
  }
  detail::FlowLossWorkspace ws;
  MlpParams grad = MlpParams::zeros(model.net.layer_dims);
  const double loss = detail::fm_loss_batch_with_draws(model, batch, ts, x0, &grad, ws);
  return {loss, std::move(grad)};
}

struct FlowTrainResult {
  FlowModel model;
  std::vector<double> loss_history;  // mean training loss per epoch
  std::size_t best_epoch = 0;
};

//! Shuffled mini-batch Adam training of the conditional vector field on a
//! dataset whose CV values are computed through m. Fresh (t, X0) draws every
//! epoch. With cfg.patience set, training stops once the epoch loss has not
//! improved for that many epochs and the best parameters seen are restored.
inline FlowTrainResult train_flow(const Dataset& data, const CvMap& m, const TrainConfig& cfg,
                                  const std::vector<std::size_t>& hidden_dims) {
  if (data.empty()) throw ConfigError("train_flow: empty dataset");
  const std::size_t n = data.size();
  const std::size_t d = data.dim;
  const std::size_t k = cv_dim(m);
  if (cfg.batch_size == 0 || cfg.batch_size > n) {
    throw ConfigError("train_flow: batch_size must be in [1, dataset size]");
  }

  Matrix xs(n, d);
  Matrix zs(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    std::copy(row.begin(), row.end(), xs.row(i));
    const Vector z = cv_value(m, row);
    std::copy(z.begin(), z.end(), zs.row(i));
  }

  Rng rng(cfg.seed);
  FlowTrainResult res;
  res.model = FlowModel::make(d, k, hidden_dims, rng);
  res.model.x_stats = NormStats::from_data(xs);
  res.model.z_stats = NormStats::from_data(zs);
  res.model.validate();

  AdamState opt = AdamState::for_params(res.model.net, cfg.learning_rate, cfg.weight_decay);
  MlpParams grad = MlpParams::zeros(res.model.net.layer_dims);
  detail::FlowLossWorkspace ws;
  FlowBatch batch;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  double best_loss = std::numeric_limits<double>::infinity();
  MlpParams best_params = res.model.net;

  Vector ts;
  Matrix x0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      batch.x.resize(b, d);
      batch.z.resize(b, k);
      for (std::size_t r = 0; r < b; ++r) {
        const std::size_t src = order[start + r];
        std::copy(xs.row(src), xs.row(src) + d, batch.x.row(r));
        std::copy(zs.row(src), zs.row(src) + k, batch.z.row(r));
      }
      ts.resize(b);
      x0.resize(b, d);
      for (std::size_t r = 0; r < b; ++r) {
        ts[r] = rng.uniform01();
        rng.fill_normal(x0.row(r), d);
      }
      grad.set_zero();
      double loss = 0.0;
      try {
        loss = detail::fm_loss_batch_with_draws(res.model, batch, ts, x0, &grad, ws);
      } catch (const NumericalError&) {
        throw NumericalError("train_flow: divergent loss at epoch " + std::to_string(epoch));
      }
      adam_step(res.model.net, grad, opt);
      epoch_sum += loss * static_cast<double>(b);
    }
    const double epoch_loss = epoch_sum / static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw NumericalError("train_flow: divergent loss at epoch " + std::to_string(epoch));
    }
    res.loss_history.push_back(epoch_loss);
    if (epoch_loss < best_loss) {
      best_loss = epoch_loss;
      res.best_epoch = epoch;
      if (cfg.patience) best_params = res.model.net;
    }
    if (cfg.patience && epoch - res.best_epoch > *cfg.patience) break;
  }
  if (cfg.patience && !res.loss_history.empty()) res.model.net = best_params;
  return res;
}

//! Integrates dX/dt = v^(z)(X, t) with classical RK4 on a uniform grid over
//! [0, 1] for n_samples standard-Gaussian prior draws, all in standardized
//! space, and de-standardizes the terminal states. n_time_steps = 0 returns
//! the de-standardized prior draws themselves.
inline Dataset generate(const FlowModel& model, const Vector& z, std::size_t n_samples,
                        std::size_t n_time_steps, std::uint64_t seed) {
  model.validate();
  if (z.size() != model.k) throw ShapeError("generate: z dimension mismatch");
  const std::size_t d = model.d;
  const std::size_t k = model.k;

  Rng rng(seed);
  Matrix state(n_samples, d);
  rng.fill_normal(state.data.data(), state.data.size());

  Vector z_std(k);
  for (std::size_t j = 0; j < k; ++j) {
    z_std[j] = (z[j] - model.z_stats.mean[j]) / model.z_stats.std[j];
  }

  MlpWorkspace mlp_ws;
  Matrix input(n_samples, d + 1 + k);
  Matrix stage(n_samples, d);
  std::array<Matrix, 4> slopes;

  auto eval_field = [&](const Matrix& s, double t, Matrix& out) {
    for (std::size_t r = 0; r < n_samples; ++r) {
      double* row = input.row(r);
      const double* sr = s.row(r);
      for (std::size_t i = 0; i < d; ++i) row[i] = sr[i];
      row[d] = t;
      for (std::size_t j = 0; j < k; ++j) row[d + 1 + j] = z_std[j];
    }
    mlp_forward_batch(model.net, input, mlp_ws);
    out = mlp_ws.acts.back();
  };

  if (n_time_steps > 0) {
    const double h = 1.0 / static_cast<double>(n_time_steps);
    for (std::size_t step = 0; step < n_time_steps; ++step) {
      const double t = static_cast<double>(step) * h;
      eval_field(state, t, slopes[0]);
      auto advance = [&](const Matrix& slope, double factor) {
        for (std::size_t i = 0; i < stage.data.size(); ++i) {
          stage.data[i] = state.data[i] + factor * slope.data[i];
        }
      };
      advance(slopes[0], 0.5 * h);
      eval_field(stage, t + 0.5 * h, slopes[1]);
      advance(slopes[1], 0.5 * h);
      eval_field(stage, t + 0.5 * h, slopes[2]);
      advance(slopes[2], h);
      eval_field(stage, t + h, slopes[3]);
      for (std::size_t i = 0; i < state.data.size(); ++i) {
        state.data[i] += h / 6.0 *
                         (slopes[0].data[i] + 2.0 * slopes[1].data[i] + 2.0 * slopes[2].data[i] +
                          slopes[3].data[i]);
      }
      if (!all_finite(state.data.data(), state.data.size())) {
        throw NumericalError("generate: non-finite state at time step " + std::to_string(step));
      }
    }
  }

  Dataset out(d);
  out.reserve(n_samples);
  out.meta.source = "generated";
  out.meta.seed = seed;
  Vector point(d);
  for (std::size_t r = 0; r < n_samples; ++r) {
    const double* sr = state.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      point[i] = model.x_stats.mean[i] + model.x_stats.std[i] * sr[i];
    }
    out.push_back(point);
  }
  return out;
}

}  // namespace levelflow
