#include <catch2/catch_amalgamated.hpp>

#include "levelflow/projection.hpp"
#include "levelflow/rng.hpp"
#include "test_helpers.hpp"

using namespace levelflow;

TEST_CASE("radial projection from (2,0) lands on the unit circle along the axis") {
  const CvMap m = RadialCv{};
  ProjectionConfig cfg;  // paper defaults: step 0.01, 7000 steps, tol 1e-3
  const auto [point, steps] = project_to_levelset(m, {1.0}, Vector{2.0, 0.0}, cfg);
  REQUIRE(point[1] == 0.0);  // motion stays on the x-axis ray
  REQUIRE(std::abs(point[0] * point[0] - 1.0) < 1.0e-3);
  REQUIRE(steps > 0);

  // Independent 1D oracle: the same explicit-Euler recursion on the radius.
  double r = 2.0;
  std::size_t oracle_steps = 0;
  while (std::abs(r * r - 1.0) >= 1.0e-3) {
    r += cfg.step_size * (-(r * r - 1.0) * 2.0 * r);
    ++oracle_steps;
  }
  REQUIRE_THAT(point[0], Catch::Matchers::WithinAbs(r, 1.0e-12));
  REQUIRE(steps == oracle_steps);
}

TEST_CASE("points already on the level-set are returned unchanged with zero steps") {
  const CvMap m = RadialCv{};
  ProjectionConfig cfg;
  const ProjectionResult res = try_project_to_levelset(m, {1.0}, Vector{1.0, 0.0}, cfg);
  REQUIRE(res.converged);
  REQUIRE(res.steps_used == 0);
  REQUIRE(res.point == Point{1.0, 0.0});
}

TEST_CASE("the origin is a stationary point reported as non-convergence") {
  const CvMap m = RadialCv{};
  ProjectionConfig cfg;
  cfg.max_steps = 200;
  const ProjectionResult res = try_project_to_levelset(m, {1.0}, Vector{0.0, 0.0}, cfg);
  REQUIRE_FALSE(res.converged);
  REQUIRE_THAT(res.residual, Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THROWS_AS(project_to_levelset(m, {1.0}, Vector{0.0, 0.0}, cfg), ConvergenceError);
}

TEST_CASE("G decreases monotonically along accepted steps") {
  const CvMap m = RadialCv{};
  ProjectionConfig cfg;
  Rng rng(55);
  for (int i = 0; i < 20; ++i) {
    const Vector x{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    std::vector<double> trace;
    try_project_to_levelset(m, {1.5}, x, cfg, &trace);
    for (std::size_t s = 1; s < trace.size(); ++s) REQUIRE(trace[s] <= trace[s - 1]);
  }
}

TEST_CASE("log G decays linearly for the radial CV away from the origin") {
  const CvMap m = RadialCv{};
  ProjectionConfig cfg;
  cfg.tolerance = 1.0e-8;
  std::vector<double> trace;
  const ProjectionResult res = try_project_to_levelset(m, {1.0}, Vector{2.0, 0.0}, cfg, &trace);
  REQUIRE(res.converged);
  Vector steps;
  Vector log_g;
  for (std::size_t s = 0; s < trace.size(); ++s) {
    if (trace[s] <= 0.0) break;
    steps.push_back(static_cast<double>(s));
    log_g.push_back(std::log(trace[s]));
  }
  REQUIRE(steps.size() > 20);
  REQUIRE(testutil::fit_slope(steps, log_g) < 0.0);
  REQUIRE(testutil::fit_r2(steps, log_g) > 0.99);
}

TEST_CASE("an oversized step triggers halving and still converges") {
  const CvMap m = RadialCv{};
  ProjectionConfig cfg;
  cfg.step_size = 1.0;  // overshoots: G increases on the first attempt
  const ProjectionResult res = try_project_to_levelset(m, {1.0}, Vector{3.0, 0.5}, cfg);
  REQUIRE(res.converged);
  REQUIRE(res.halvings > 0);
}

TEST_CASE("z dimension mismatch is rejected") {
  const CvMap m = RadialCv{};
  ProjectionConfig cfg;
  REQUIRE_THROWS_AS(try_project_to_levelset(m, {1.0, 2.0}, Vector{1.0, 0.0}, cfg), ShapeError);
}
