#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levelflow/adam.hpp"
#include "levelflow/cv_map.hpp"
#include "levelflow/dataset.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/mlp.hpp"
#include "levelflow/rng.hpp"

namespace levelflow {

struct AutoencoderConfig {
  std::vector<std::size_t> encoder_dims;  // data dim first, bottleneck last
  std::vector<std::size_t> decoder_dims;  // bottleneck first, data dim last
  std::size_t epochs = 200;
  std::size_t batch_size = 128;
  double learning_rate = 1.0e-3;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
};

struct AutoencoderResult {
  EncoderCv encoder;
  MlpParams decoder;
  std::vector<double> loss_history;  // mean reconstruction MSE per epoch
};

//! Mean squared reconstruction error of an encoder/decoder pair over a
//! dataset; evaluation helper shared with the tests.
inline double autoencoder_mse(const EncoderCv& enc, const MlpParams& dec, const Dataset& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.row(i);
    const Vector code = mlp_forward(enc.net, Vector(row.begin(), row.end()));
    const Vector rec = mlp_forward(dec, code);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double r = rec[c] - row[c];
      total += r * r;
    }
  }
  return total / static_cast<double>(data.size());
}

//! Trains the CV autoencoder by minimizing the mean squared reconstruction
//! error with shuffled mini-batch Adam. Returns the trained encoder as a
//! CvMap component (identity output affine) together with the decoder and
//! the per-epoch training loss.
inline AutoencoderResult train_autoencoder(const Dataset& data, const AutoencoderConfig& cfg) {
  if (data.empty()) throw ConfigError("train_autoencoder: empty dataset");
  if (cfg.encoder_dims.size() < 2 || cfg.decoder_dims.size() < 2) {
    throw ConfigError("train_autoencoder: encoder/decoder need at least two layer dims");
  }
  if (cfg.encoder_dims.front() != data.dim || cfg.decoder_dims.back() != data.dim) {
    throw ConfigError("train_autoencoder: network dims do not match data dimension");
  }
  if (cfg.encoder_dims.back() != cfg.decoder_dims.front()) {
    throw ConfigError("train_autoencoder: bottleneck dims of encoder and decoder differ");
  }
  if (cfg.batch_size == 0) throw ConfigError("train_autoencoder: batch_size must be positive");

  const std::size_t n = data.size();
  const std::size_t d = data.dim;
  Rng rng(cfg.seed);

  AutoencoderResult res;
  res.encoder = EncoderCv::from_net(MlpParams::random_init(cfg.encoder_dims, rng));
  res.decoder = MlpParams::random_init(cfg.decoder_dims, rng);

  AdamState enc_opt = AdamState::for_params(res.encoder.net, cfg.learning_rate, cfg.weight_decay);
  AdamState dec_opt = AdamState::for_params(res.decoder, cfg.learning_rate, cfg.weight_decay);
  MlpParams enc_grad = MlpParams::zeros(res.encoder.net.layer_dims);
  MlpParams dec_grad = MlpParams::zeros(res.decoder.layer_dims);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  MlpWorkspace enc_ws;
  MlpWorkspace dec_ws;
  Matrix batch;
  Matrix out_grad;
  Matrix code_grad;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      batch.resize(b, d);
      for (std::size_t r = 0; r < b; ++r) {
        const auto row = data.row(order[start + r]);
        std::copy(row.begin(), row.end(), batch.row(r));
      }
      mlp_forward_batch(res.encoder.net, batch, enc_ws);
      mlp_forward_batch(res.decoder, enc_ws.acts.back(), dec_ws);
      const Matrix& rec = dec_ws.acts.back();

      out_grad.resize(b, d);
      double loss = 0.0;
      const double scale = 2.0 / static_cast<double>(b);
      for (std::size_t i = 0; i < rec.data.size(); ++i) {
        const double r = rec.data[i] - batch.data[i];
        loss += r * r;
        out_grad.data[i] = scale * r;
      }
      loss /= static_cast<double>(b);
      if (!std::isfinite(loss)) {
        throw NumericalError("train_autoencoder: non-finite loss at epoch " +
                             std::to_string(epoch));
      }

      dec_grad.set_zero();
      enc_grad.set_zero();
      mlp_backward_batch(res.decoder, dec_ws, out_grad, dec_grad, &code_grad);
      mlp_backward_batch(res.encoder.net, enc_ws, code_grad, enc_grad);
      adam_step(res.decoder, dec_grad, dec_opt);
      adam_step(res.encoder.net, enc_grad, enc_opt);
      epoch_sum += loss * static_cast<double>(b);
    }
    res.loss_history.push_back(epoch_sum / static_cast<double>(n));
  }
  return res;
}

//! Composes the encoder with the affine map sending [lo, hi] in raw encoder
//! output units to [target_lo, target_hi]; flips the orientation when
//! requested. The learned CV scale is arbitrary, so pipelines pin it to the
//! configured grid range this way. k = 1 only.
inline void calibrate_encoder_range(EncoderCv& enc, double lo, double hi, double target_lo,
                                    double target_hi, bool flip) {
  if (enc.net.output_dim() != 1) throw ConfigError("calibrate_encoder_range: k = 1 only");
  if (!(hi > lo)) throw ConfigError("calibrate_encoder_range: degenerate raw range");
  const double slope = (target_hi - target_lo) / (hi - lo);
  const double a = flip ? -slope : slope;
  const double b = flip ? target_hi - a * lo : target_lo - a * lo;
  enc.out_scale[0] = a * enc.out_scale[0];
  enc.out_shift[0] = a * enc.out_shift[0] + b;
}

}  // namespace levelflow
