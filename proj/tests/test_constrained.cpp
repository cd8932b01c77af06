#include <cmath>
#include <numbers>

#include <catch2/catch_amalgamated.hpp>

#include "levelflow/constrained.hpp"
#include "test_helpers.hpp"

using namespace levelflow;

TEST_CASE("constrained samples stay on the unit circle with co-area weights 1/2") {
  const Potential p = IsotropicQuadratic{1.0};
  const CvMap m = RadialCv{};
  LangevinConfig cfg;
  cfg.step_size = 0.05;
  cfg.beta = 1.0;
  cfg.n_steps = 2000;
  cfg.record_every = 2;
  cfg.seed = 4;
  cfg.initial_point = {2.0, 0.0};
  const double tol = 1.0e-5;
  const WeightedDataset out = sample_constrained(p, m, {1.0}, cfg, tol);
  REQUIRE(out.points.size() == 1000);
  REQUIRE(out.weights.size() == 1000);
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const auto x = out.points.row(i);
    REQUIRE(std::abs(x[0] * x[0] + x[1] * x[1] - 1.0) < tol);
    // |grad xi| = 2|x| = 2 on the circle.
    REQUIRE_THAT(out.weights[i], Catch::Matchers::WithinAbs(0.5, 1.0e-4));
  }
}

TEST_CASE("weighted angular distribution is uniform on the circle") {
  const Potential p = IsotropicQuadratic{1.0};
  const CvMap m = RadialCv{};
  LangevinConfig cfg;
  cfg.step_size = 0.05;
  cfg.beta = 1.0;
  cfg.n_steps = 80000;
  cfg.record_every = 8;
  cfg.seed = 8;
  cfg.initial_point = {1.0, 0.0};
  const WeightedDataset out = sample_constrained(p, m, {1.0}, cfg, 1.0e-5);
  const std::size_t n_bins = 16;
  Vector mass(n_bins, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const auto x = out.points.row(i);
    double angle = std::atan2(x[1], x[0]);
    if (angle < 0.0) angle += 2.0 * std::numbers::pi;
    const auto bin = std::min(
        n_bins - 1, static_cast<std::size_t>(angle / (2.0 * std::numbers::pi / n_bins)));
    mass[bin] += out.weights[i];
    total += out.weights[i];
  }
  // 3 sigma multinomial band around the uniform expectation.
  const double n = static_cast<double>(out.points.size());
  const double p_bin = 1.0 / static_cast<double>(n_bins);
  const double sigma = std::sqrt(n * p_bin * (1.0 - p_bin));
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double count_equiv = mass[b] / (total / n);
    REQUIRE_THAT(count_equiv, Catch::Matchers::WithinAbs(n * p_bin, 3.0 * sigma));
  }
}

TEST_CASE("an unreachable level-set fails upfront") {
  const Potential p = IsotropicQuadratic{1.0};
  // Zero-weight encoder: xi is identically zero, so Sigma_1 is empty.
  const CvMap m = EncoderCv::from_net(MlpParams::zeros({2, 4, 1}));
  LangevinConfig cfg;
  cfg.step_size = 0.05;
  cfg.beta = 1.0;
  cfg.n_steps = 10;
  cfg.record_every = 1;
  cfg.initial_point = {1.0, 0.0};
  ProjectionConfig proj;
  proj.max_steps = 50;
  REQUIRE_THROWS_AS(sample_constrained(p, m, {1.0}, cfg, 1.0e-5, proj), ConvergenceError);
}
