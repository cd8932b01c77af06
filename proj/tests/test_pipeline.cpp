#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "levelflow/pipeline.hpp"
#include "test_helpers.hpp"

using namespace levelflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "levelflow_pipeline" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

//! Small but complete circles config; minutes of compute are not needed to
//! exercise the plumbing.
ExperimentConfig tiny_circles_config(const fs::path& out) {
  ExperimentConfig cfg = ExperimentConfig::circles2d_default();
  cfg.output_dir = out.string();
  cfg.circles.n_samples = 256;
  cfg.flow_training.epochs = 3;
  cfg.flow_training.batch_size = 64;
  cfg.flow_training.patience.reset();
  cfg.flow_training.hidden_dims = {16};
  cfg.generation.n_samples = 16;
  cfg.generation.n_time_steps = 8;
  cfg.evaluation.z_grid_points = 4;
  cfg.evaluation.deviation_n_samples = 16;
  cfg.evaluation.n_bins = 16;
  return cfg;
}

}  // namespace

TEST_CASE("noise-free circles lie exactly on the two rings") {
  CirclesConfig cc;
  cc.n_samples = 100;
  cc.noise_sigma = 0.0;
  const Dataset d = pipeline::make_circles_dataset(cc, 5);
  REQUIRE(d.size() == 100);
  std::size_t outer = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = norm2(d.row(i).data(), 2);
    const bool on_outer = std::abs(r - 1.0) < 1e-12;
    const bool on_inner = std::abs(r - 0.5) < 1e-12;
    REQUIRE((on_outer || on_inner));
    if (on_outer) ++outer;
  }
  REQUIRE(outer == 50);
}

TEST_CASE("tiny circles pipeline produces the full artifact set deterministically") {
  const fs::path out_a = fresh_dir("run_a");
  const fs::path out_b = fresh_dir("run_b");
  ExperimentConfig cfg = tiny_circles_config(out_a);

  pipeline::cmd_reproduce(cfg, pipeline::RunLayout{out_a});
  cfg.output_dir = out_b.string();
  pipeline::cmd_reproduce(cfg, pipeline::RunLayout{out_b});

  const std::vector<std::string> metric_files = {
      "metrics/deviation_curve.csv", "metrics/mean_cv_curve.csv", "metrics/proportion_curve.csv",
      "metrics/cv_density.csv"};
  for (const auto& rel : metric_files) {
    REQUIRE(fs::exists(out_a / rel));
    REQUIRE(slurp(out_a / rel) == slurp(out_b / rel));
  }
  REQUIRE(fs::exists(out_a / "config.json"));
  REQUIRE(fs::exists(out_a / "manifest.json"));
  REQUIRE(fs::exists(out_a / "datasets/circles.csv"));
  REQUIRE(fs::exists(out_a / "datasets/circles.meta"));
  REQUIRE(fs::exists(out_a / "checkpoints/flow_circles.json"));
  REQUIRE(fs::exists(out_a / "metrics/flow_train_loss_circles.csv"));

  const auto manifest = nlohmann::json::parse(slurp(out_a / "manifest.json"));
  REQUIRE(manifest.at("experiment") == "circles2d");
  REQUIRE(manifest.at("artifacts").size() >= 8);
}

TEST_CASE("project command writes projected points and a report") {
  const fs::path out = fresh_dir("project");
  ExperimentConfig cfg = tiny_circles_config(out);
  const pipeline::RunLayout run{out};

  Dataset d(2);
  d.push_back(Vector{2.0, 0.0});
  d.push_back(Vector{0.0, 1.6});
  d.push_back(Vector{1.0, 0.0});
  const fs::path input = out / "input.csv";
  fs::create_directories(out);
  write_dataset_csv(input, d, /*with_meta=*/false);

  const auto written = pipeline::cmd_project(cfg, run, input, 1.0);
  REQUIRE(written.size() == 2);
  const WeightedDataset projected = read_dataset_csv(written[0]);
  for (std::size_t i = 0; i < projected.points.size(); ++i) {
    const auto x = projected.points.row(i);
    REQUIRE(std::abs(x[0] * x[0] + x[1] * x[1] - 1.0) < cfg.projection.tolerance * 3.0);
  }
  const std::string report = slurp(written[1]);
  REQUIRE(report.rfind("index,residual,steps,converged", 0) == 0);
}

TEST_CASE("commands validate inputs before writing anything") {
  const fs::path out = fresh_dir("validate");
  ExperimentConfig cfg = tiny_circles_config(out);
  const pipeline::RunLayout run{out};
  // No dataset/checkpoint on disk yet: evaluate must fail without creating
  // metric files.
  REQUIRE_THROWS_AS(pipeline::cmd_evaluate(cfg, run), IoError);
  REQUIRE_FALSE(fs::exists(out / "metrics/deviation_curve.csv"));

  cfg.experiment = "nonsense";
  REQUIRE_THROWS_AS(pipeline::cmd_make_dataset(cfg, run), ConfigError);
}

TEST_CASE("mueller_brown make-dataset variants depend on the CV checkpoint") {
  const fs::path out = fresh_dir("mb_variants");
  ExperimentConfig cfg = ExperimentConfig::mueller_brown_default();
  cfg.output_dir = out.string();
  const pipeline::RunLayout run{out};
  // ABF sampling needs the encoder checkpoint, which does not exist yet.
  REQUIRE_THROWS_AS(pipeline::cmd_make_dataset(cfg, run, "abf"), IoError);
  REQUIRE_THROWS_AS(pipeline::cmd_make_dataset(cfg, run, "bogus"), ConfigError);
}

TEST_CASE("train-cv rejects a corrupt dataset file") {
  const fs::path out = fresh_dir("mb_corrupt");
  ExperimentConfig cfg = ExperimentConfig::mueller_brown_default();
  cfg.output_dir = out.string();
  const pipeline::RunLayout run{out};
  run.ensure_dirs();
  {
    std::ofstream bad(run.dataset_file("unbiased"));
    bad << "x0,x1\n0.1,corrupt\n";
  }
  REQUIRE_THROWS_AS(pipeline::cmd_train_cv(cfg, run), IoError);
  REQUIRE_FALSE(fs::exists(run.cv_checkpoint()));
}
