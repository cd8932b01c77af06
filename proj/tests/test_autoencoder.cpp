#include <catch2/catch_amalgamated.hpp>

#include "levelflow/autoencoder.hpp"
#include "levelflow/langevin.hpp"
#include "test_helpers.hpp"

using namespace levelflow;

namespace {

Dataset repeated_point(const Vector& p, std::size_t n) {
  Dataset d(p.size());
  for (std::size_t i = 0; i < n; ++i) d.push_back(p);
  return d;
}

}  // namespace

TEST_CASE("training on one repeated point drives reconstruction error below 1e-4") {
  const Dataset data = repeated_point({0.3, -0.7}, 16);
  AutoencoderConfig cfg;
  cfg.encoder_dims = {2, 8, 1};
  cfg.decoder_dims = {1, 8, 2};
  cfg.epochs = 200;
  cfg.batch_size = 16;
  cfg.learning_rate = 1.0e-2;
  cfg.seed = 3;
  const AutoencoderResult res = train_autoencoder(data, cfg);
  REQUIRE(autoencoder_mse(res.encoder, res.decoder, data) < 1.0e-4);
  REQUIRE(res.loss_history.size() == 200);
}

TEST_CASE("zero epochs return the seeded initialization unchanged") {
  const Dataset data = repeated_point({0.1, 0.2}, 4);
  AutoencoderConfig cfg;
  cfg.encoder_dims = {2, 4, 1};
  cfg.decoder_dims = {1, 4, 2};
  cfg.epochs = 0;
  cfg.batch_size = 4;
  cfg.seed = 5;
  const AutoencoderResult a = train_autoencoder(data, cfg);
  const AutoencoderResult b = train_autoencoder(data, cfg);
  REQUIRE(a.encoder.net == b.encoder.net);
  REQUIRE(a.decoder == b.decoder);
  REQUIRE(a.loss_history.empty());

  Rng rng(cfg.seed);
  const MlpParams fresh_enc = MlpParams::random_init(cfg.encoder_dims, rng);
  REQUIRE(a.encoder.net == fresh_enc);
}

TEST_CASE("reconstruction error on trajectory data falls below the data variance") {
  LangevinConfig lc;
  lc.step_size = 2.0e-4;
  lc.beta = 0.1;
  lc.n_steps = 200000;
  lc.record_every = 40;
  lc.seed = 77;
  lc.initial_point = {-0.6, 1.2};
  const Dataset data = sample_langevin(MuellerBrown{}, lc);

  double variance = 0.0;
  Vector mean(2, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    mean[0] += data.row(i)[0];
    mean[1] += data.row(i)[1];
  }
  mean[0] /= static_cast<double>(data.size());
  mean[1] /= static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = data.row(i);
    variance += (r[0] - mean[0]) * (r[0] - mean[0]) + (r[1] - mean[1]) * (r[1] - mean[1]);
  }
  variance /= static_cast<double>(data.size());

  AutoencoderConfig cfg;
  cfg.encoder_dims = {2, 32, 32, 32, 1};
  cfg.decoder_dims = {1, 32, 2};
  cfg.epochs = 50;
  cfg.batch_size = 128;
  cfg.learning_rate = 1.0e-3;
  cfg.seed = 7;
  const AutoencoderResult res = train_autoencoder(data, cfg);
  REQUIRE(autoencoder_mse(res.encoder, res.decoder, data) < variance);
}

TEST_CASE("full-batch loss is non-increasing at a small learning rate") {
  Rng rng(13);
  Dataset data(2);
  for (int i = 0; i < 64; ++i) {
    data.push_back(Vector{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
  }
  AutoencoderConfig cfg;
  cfg.encoder_dims = {2, 8, 1};
  cfg.decoder_dims = {1, 8, 2};
  cfg.epochs = 50;
  cfg.batch_size = data.size();  // one full batch per epoch
  cfg.learning_rate = 1.0e-4;
  cfg.seed = 19;
  const AutoencoderResult res = train_autoencoder(data, cfg);
  for (std::size_t e = 1; e < res.loss_history.size(); ++e) {
    REQUIRE(res.loss_history[e] <= res.loss_history[e - 1] + 1.0e-9);
  }
}

TEST_CASE("autoencoder training rejects bad inputs") {
  AutoencoderConfig cfg;
  cfg.encoder_dims = {2, 4, 1};
  cfg.decoder_dims = {1, 4, 2};
  REQUIRE_THROWS_AS(train_autoencoder(Dataset(2), cfg), ConfigError);

  const Dataset data = repeated_point({0.0, 0.0}, 4);
  cfg.encoder_dims = {3, 4, 1};
  REQUIRE_THROWS_AS(train_autoencoder(data, cfg), ConfigError);
  cfg.encoder_dims = {2, 4, 2};
  REQUIRE_THROWS_AS(train_autoencoder(data, cfg), ConfigError);
}
