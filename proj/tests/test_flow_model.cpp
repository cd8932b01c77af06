#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "levelflow/dataset.hpp"
#include "levelflow/flow_model.hpp"
#include "test_helpers.hpp"

using namespace levelflow;

namespace {

FlowModel identity_model(MlpParams net, std::size_t d, std::size_t k) {
  FlowModel fm;
  fm.net = std::move(net);
  fm.d = d;
  fm.k = k;
  fm.x_stats = NormStats::identity(d);
  fm.z_stats = NormStats::identity(k);
  fm.validate();
  return fm;
}

//! Single-layer net realizing v(x, t, z) = x (ignores t and z).
FlowModel linear_field_model() {
  MlpParams net = MlpParams::zeros({4, 2});
  net.weights[0](0, 0) = 1.0;
  net.weights[0](1, 1) = 1.0;
  return identity_model(std::move(net), 2, 1);
}

//! Zero-layer... constant bias net: v = (c0, c1) everywhere.
FlowModel constant_field_model(double c0, double c1) {
  MlpParams net = MlpParams::zeros({4, 2});
  net.biases[0] = {c0, c1};
  return identity_model(std::move(net), 2, 1);
}

}  // namespace

TEST_CASE("zero network with forced draws gives the hand-computed loss") {
  const FlowModel fm = identity_model(MlpParams::zeros({4, 2}), 2, 1);
  FlowBatch batch;
  batch.x.resize(1, 2);
  batch.x(0, 0) = 1.0;
  batch.x(0, 1) = 1.0;
  batch.z.resize(1, 1);
  batch.z(0, 0) = 2.0;
  const Vector ts{0.5};
  Matrix x0(1, 2);  // forced X0 = 0
  detail::FlowLossWorkspace ws;
  const double loss = detail::fm_loss_batch_with_draws(fm, batch, ts, x0, nullptr, ws);
  REQUIRE_THAT(loss, Catch::Matchers::WithinAbs(2.0, 1e-14));
}

TEST_CASE("a field equal to the target velocity has zero loss") {
  // Constant target: X0 forced to x1 - (0.4, -0.2), so X1 - X0 = (0.4, -0.2).
  const FlowModel fm = constant_field_model(0.4, -0.2);
  FlowBatch batch;
  batch.x.resize(2, 2);
  batch.x(0, 0) = 0.9;
  batch.x(0, 1) = -0.3;
  batch.x(1, 0) = -1.1;
  batch.x(1, 1) = 0.5;
  batch.z.resize(2, 1);
  Matrix x0(2, 2);
  for (std::size_t r = 0; r < 2; ++r) {
    x0(r, 0) = batch.x(r, 0) - 0.4;
    x0(r, 1) = batch.x(r, 1) + 0.2;
  }
  const Vector ts{0.25, 0.75};
  detail::FlowLossWorkspace ws;
  const double loss = detail::fm_loss_batch_with_draws(fm, batch, ts, x0, nullptr, ws);
  REQUIRE_THAT(loss, Catch::Matchers::WithinAbs(0.0, 1e-28));
}

TEST_CASE("loss gradients match finite differences for fixed draws") {
  Rng rng(61);
  FlowModel fm;
  fm.d = 2;
  fm.k = 1;
  fm.net = MlpParams::random_init({4, 6, 2}, rng);
  fm.x_stats = NormStats::identity(2);
  fm.z_stats = NormStats::identity(1);
  fm.x_stats.mean = {0.1, -0.2};
  fm.x_stats.std = {1.3, 0.8};
  fm.z_stats.mean = {0.5};
  fm.z_stats.std = {2.0};

  const std::size_t b = 3;
  FlowBatch batch;
  batch.x.resize(b, 2);
  batch.z.resize(b, 1);
  Matrix x0(b, 2);
  Vector ts(b);
  for (std::size_t r = 0; r < b; ++r) {
    batch.x(r, 0) = rng.uniform(-1.0, 1.0);
    batch.x(r, 1) = rng.uniform(-1.0, 1.0);
    batch.z(r, 0) = rng.uniform(-1.0, 1.0);
    x0(r, 0) = rng.normal();
    x0(r, 1) = rng.normal();
    ts[r] = rng.uniform01();
  }

  detail::FlowLossWorkspace ws;
  MlpParams grad = MlpParams::zeros(fm.net.layer_dims);
  detail::fm_loss_batch_with_draws(fm, batch, ts, x0, &grad, ws);

  FlowModel probe = fm;
  for (std::size_t i = 0; i < probe.net.param_count(); ++i) {
    const double orig = probe.net.param_at(i);
    probe.net.param_at(i) = orig + 1e-5;
    const double hi = detail::fm_loss_batch_with_draws(probe, batch, ts, x0, nullptr, ws);
    probe.net.param_at(i) = orig - 1e-5;
    const double lo = detail::fm_loss_batch_with_draws(probe, batch, ts, x0, nullptr, ws);
    probe.net.param_at(i) = orig;
    REQUIRE(testutil::rel_err((hi - lo) / 2e-5, grad.param_at(i)) < 1e-5);
  }
}

TEST_CASE("rng-draw variant is reproducible and consistent with the draw order") {
  Rng rng(62);
  FlowModel fm;
  fm.d = 2;
  fm.k = 1;
  fm.net = MlpParams::random_init({4, 8, 2}, rng);
  fm.x_stats = NormStats::identity(2);
  fm.z_stats = NormStats::identity(1);
  FlowBatch batch;
  batch.x.resize(2, 2);
  batch.z.resize(2, 1);
  for (double& v : batch.x.data) v = rng.uniform(-1.0, 1.0);
  Rng d1(99);
  Rng d2(99);
  const auto [loss1, grad1] = fm_loss_batch(fm, batch, d1);
  const auto [loss2, grad2] = fm_loss_batch(fm, batch, d2);
  REQUIRE(loss1 == loss2);
  REQUIRE(grad1 == grad2);
}

TEST_CASE("objective decomposition over CV bins is exact") {
  Rng rng(63);
  FlowModel fm;
  fm.d = 2;
  fm.k = 1;
  fm.net = MlpParams::random_init({4, 10, 2}, rng);
  fm.x_stats = NormStats::identity(2);
  fm.z_stats = NormStats::identity(1);

  const std::size_t n = 30;
  FlowBatch full;
  full.x.resize(n, 2);
  full.z.resize(n, 1);
  Matrix x0(n, 2);
  Vector ts(n);
  for (std::size_t r = 0; r < n; ++r) {
    full.x(r, 0) = rng.uniform(-1.0, 1.0);
    full.x(r, 1) = rng.uniform(-1.0, 1.0);
    full.z(r, 0) = rng.uniform(0.0, 3.0);
    x0(r, 0) = rng.normal();
    x0(r, 1) = rng.normal();
    ts[r] = rng.uniform01();
  }
  detail::FlowLossWorkspace ws;
  const double full_loss = detail::fm_loss_batch_with_draws(fm, full, ts, x0, nullptr, ws);

  // Partition by integer CV bin, keeping each point's (t, X0) draw.
  double recombined = 0.0;
  for (int bin = 0; bin < 3; ++bin) {
    FlowBatch part;
    part.x.resize(0, 2);
    part.z.resize(0, 1);
    Matrix part_x0(0, 2);
    Vector part_ts;
    std::size_t count = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (static_cast<int>(full.z(r, 0)) != bin) continue;
      ++count;
      for (std::size_t c = 0; c < 2; ++c) {
        part.x.data.push_back(full.x(r, c));
        part_x0.data.push_back(x0(r, c));
      }
      part.z.data.push_back(full.z(r, 0));
      part_ts.push_back(ts[r]);
    }
    if (count == 0) continue;
    part.x.rows = count;
    part.x.cols = 2;
    part.z.rows = count;
    part.z.cols = 1;
    part_x0.rows = count;
    part_x0.cols = 2;
    const double part_loss =
        detail::fm_loss_batch_with_draws(fm, part, part_ts, part_x0, nullptr, ws);
    recombined += part_loss * static_cast<double>(count);
  }
  recombined /= static_cast<double>(n);
  REQUIRE_THAT(recombined, Catch::Matchers::WithinAbs(full_loss, 1e-13));
}

TEST_CASE("RK4 integrates a constant field exactly") {
  const FlowModel fm = constant_field_model(0.6, 0.0);
  for (std::size_t steps : {1, 7, 100}) {
    const Dataset out = generate(fm, {0.6}, 5, steps, 123);
    // Terminal state = prior draw + v for every sample; recover the draws.
    Rng rng(123);
    Matrix prior(5, 2);
    rng.fill_normal(prior.data.data(), prior.data.size());
    for (std::size_t r = 0; r < 5; ++r) {
      REQUIRE_THAT(out.row(r)[0], Catch::Matchers::WithinAbs(prior(r, 0) + 0.6, 1e-12));
      REQUIRE_THAT(out.row(r)[1], Catch::Matchers::WithinAbs(prior(r, 1) + 0.0, 1e-12));
    }
  }
}

TEST_CASE("RK4 on the linear field reproduces the exponential within O(h^4)") {
  const FlowModel fm = linear_field_model();
  Rng rng(77);
  Matrix prior(64, 2);
  const Dataset out = generate(fm, {0.0}, 64, 100, 77);
  rng.fill_normal(prior.data.data(), prior.data.size());
  const double e = std::exp(1.0);
  for (std::size_t r = 0; r < 64; ++r) {
    REQUIRE_THAT(out.row(r)[0], Catch::Matchers::WithinAbs(prior(r, 0) * e, 1e-6));
    REQUIRE_THAT(out.row(r)[1], Catch::Matchers::WithinAbs(prior(r, 1) * e, 1e-6));
  }
}

TEST_CASE("RK4 convergence order on the linear field is four") {
  const FlowModel fm = linear_field_model();
  const double e = std::exp(1.0);
  Vector log_h;
  Vector log_err;
  for (std::size_t steps : {10, 20, 40, 80}) {
    const Dataset out = generate(fm, {0.0}, 1, steps, 78);
    Rng check(78);
    const Vector draw{check.normal(), check.normal()};
    const double err = std::abs(out.row(0)[0] - draw[0] * e);
    log_h.push_back(std::log(1.0 / static_cast<double>(steps)));
    log_err.push_back(std::log(err));
  }
  const double slope = testutil::fit_slope(log_h, log_err);
  REQUIRE(slope > 3.7);
  REQUIRE(slope < 4.3);
}

TEST_CASE("zero integration steps return the de-standardized prior draws") {
  FlowModel fm = constant_field_model(5.0, 5.0);
  fm.x_stats.mean = {1.0, -1.0};
  fm.x_stats.std = {2.0, 0.5};
  const Dataset out = generate(fm, {0.0}, 8, 0, 31);
  Rng rng(31);
  Matrix prior(8, 2);
  rng.fill_normal(prior.data.data(), prior.data.size());
  for (std::size_t r = 0; r < 8; ++r) {
    REQUIRE(out.row(r)[0] == 1.0 + 2.0 * prior(r, 0));
    REQUIRE(out.row(r)[1] == -1.0 + 0.5 * prior(r, 1));
  }
}

TEST_CASE("training is deterministic and zero epochs return the initialization") {
  Rng rng(91);
  Dataset data(2);
  for (int i = 0; i < 64; ++i) {
    data.push_back(Vector{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
  }
  const CvMap m = RadialCv{};
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 32;
  cfg.learning_rate = 1e-3;
  cfg.seed = 7;
  const FlowTrainResult a = train_flow(data, m, cfg, {8, 8});
  const FlowTrainResult b = train_flow(data, m, cfg, {8, 8});
  REQUIRE(a.loss_history == b.loss_history);
  REQUIRE(a.model.net == b.model.net);

  TrainConfig zero = cfg;
  zero.epochs = 0;
  const FlowTrainResult c = train_flow(data, m, zero, {8, 8});
  REQUIRE(c.loss_history.empty());
  Rng init_rng(zero.seed);
  const FlowModel fresh = FlowModel::make(2, 1, {8, 8}, init_rng);
  REQUIRE(c.model.net == fresh.net);
}

TEST_CASE("single-point training recovers the closed-form target field") {
  const Vector target{0.7, 0.5};
  Dataset data(2);
  for (int i = 0; i < 256; ++i) data.push_back(target);
  const CvMap m = RadialCv{};
  TrainConfig cfg;
  cfg.epochs = 600;
  cfg.batch_size = 256;
  cfg.learning_rate = 3e-3;
  cfg.seed = 11;
  const FlowTrainResult res = train_flow(data, m, cfg, {64, 64});

  // v(x, t) = (x* - x) / (1 - t) for a point target; probe along the
  // training interpolant distribution, away from the t = 1 singularity.
  const Vector z = cv_value(m, target);
  Rng rng(12);
  std::size_t ok = 0;
  const std::size_t n_probes = 50;
  for (std::size_t i = 0; i < n_probes; ++i) {
    const double t = rng.uniform(0.0, 0.8);
    Vector x(2);
    for (std::size_t c = 0; c < 2; ++c) {
      const double x0 = rng.normal();
      const double x1_std = (target[c] - res.model.x_stats.mean[c]) / res.model.x_stats.std[c];
      const double interp = (1.0 - t) * x0 + t * x1_std;
      x[c] = res.model.x_stats.mean[c] + res.model.x_stats.std[c] * interp;
    }
    const Vector v = res.model.velocity(x, t, z);
    Vector expect(2);
    for (std::size_t c = 0; c < 2; ++c) expect[c] = (target[c] - x[c]) / (1.0 - t);
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      err += (v[c] - expect[c]) * (v[c] - expect[c]);
      scale += expect[c] * expect[c];
    }
    if (std::sqrt(err) < 0.10 * std::max(1.0, std::sqrt(scale))) ++ok;
  }
  REQUIRE(ok >= 45);  // 90% of probes within 10%
}

TEST_CASE("train_flow validates batch size and empty datasets") {
  Dataset data(2);
  const CvMap m = RadialCv{};
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  REQUIRE_THROWS_AS(train_flow(data, m, cfg, {4}), ConfigError);
  data.push_back(Vector{1.0, 0.0});
  cfg.batch_size = 2;
  REQUIRE_THROWS_AS(train_flow(data, m, cfg, {4}), ConfigError);
}
