#include <filesystem>

#include <catch2/catch_amalgamated.hpp>

#include "levelflow/checkpoint.hpp"
#include "levelflow/config.hpp"
#include "levelflow/csv_io.hpp"
#include "test_helpers.hpp"

using namespace levelflow;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / "levelflow_io_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("dataset CSV round-trips bit-exactly, with and without weights") {
  Rng rng(71);
  WeightedDataset data;
  data.points.dim = 3;
  for (int i = 0; i < 200; ++i) {
    Vector row(3);
    // Mixed magnitudes stress the 17-digit rendering.
    row[0] = rng.normal() * std::pow(10.0, rng.uniform(-8.0, 8.0));
    row[1] = rng.uniform(-1.0, 1.0);
    row[2] = rng.normal();
    data.points.push_back(row);
    data.weights.push_back(std::abs(rng.normal()) + 1e-6);
  }
  data.points.meta.source = "langevin";
  data.points.meta.seed = 71;

  const fs::path dir = temp_dir();
  const fs::path unweighted = dir / "plain.csv";
  write_dataset_csv(unweighted, data.points);
  const WeightedDataset back = read_dataset_csv(unweighted);
  REQUIRE(back.points.dim == 3);
  REQUIRE(back.points.values == data.points.values);
  REQUIRE(back.weights.empty());
  REQUIRE(fs::exists(dir / "plain.meta"));

  const fs::path weighted = dir / "weighted.csv";
  write_weighted_dataset_csv(weighted, data);
  const WeightedDataset wback = read_dataset_csv(weighted);
  REQUIRE(wback.points.values == data.points.values);
  REQUIRE(wback.weights == data.weights);
}

TEST_CASE("malformed CSV input is rejected") {
  const fs::path dir = temp_dir();
  const fs::path bad = dir / "bad.csv";
  {
    std::ofstream out(bad);
    out << "x0,x1\n1.0,2.0\n3.0,oops\n";
  }
  REQUIRE_THROWS_AS(read_dataset_csv(bad), IoError);
  REQUIRE_THROWS_AS(read_dataset_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("checkpoints restore parameters exactly") {
  Rng rng(73);
  const fs::path dir = temp_dir();

  const MlpParams p = MlpParams::random_init({3, 16, 2}, rng);
  save_mlp_checkpoint(dir / "mlp.json", p);
  REQUIRE(load_mlp_checkpoint(dir / "mlp.json") == p);

  EncoderCv enc = EncoderCv::from_net(MlpParams::random_init({2, 8, 1}, rng));
  enc.out_scale = {-1.75};
  enc.out_shift = {0.3125};
  save_encoder_cv_checkpoint(dir / "cv.json", enc);
  const EncoderCv enc_back = load_encoder_cv_checkpoint(dir / "cv.json");
  REQUIRE(enc_back.net == enc.net);
  REQUIRE(enc_back.out_scale == enc.out_scale);
  REQUIRE(enc_back.out_shift == enc.out_shift);

  FlowModel fm;
  fm.net = MlpParams::random_init({4, 8, 2}, rng);
  fm.d = 2;
  fm.k = 1;
  fm.x_stats.mean = {0.25, -0.5};
  fm.x_stats.std = {1.5, 2.5};
  fm.z_stats.mean = {0.125};
  fm.z_stats.std = {3.0};
  save_flow_checkpoint(dir / "flow.json", fm);
  const FlowModel fm_back = load_flow_checkpoint(dir / "flow.json");
  REQUIRE(fm_back.net == fm.net);
  REQUIRE(fm_back.x_stats == fm.x_stats);
  REQUIRE(fm_back.z_stats == fm.z_stats);

  // Kind tags are enforced.
  REQUIRE_THROWS_AS(load_mlp_checkpoint(dir / "cv.json"), IoError);
  REQUIRE_THROWS_AS(load_flow_checkpoint(dir / "mlp.json"), IoError);
}

TEST_CASE("config round-trip and strict key checking") {
  const ExperimentConfig def = ExperimentConfig::mueller_brown_default();
  const nlohmann::json j = def.to_json();
  const ExperimentConfig back = ExperimentConfig::from_json(j);
  REQUIRE(back.to_json() == j);

  const ExperimentConfig c2 = ExperimentConfig::circles2d_default();
  REQUIRE(ExperimentConfig::from_json(c2.to_json()).to_json() == c2.to_json());

  nlohmann::json unknown = j;
  unknown["surprise"] = 1;
  REQUIRE_THROWS_AS(ExperimentConfig::from_json(unknown), ConfigError);

  nlohmann::json nested_unknown = j;
  nested_unknown["abf"]["typo_key"] = 2;
  REQUIRE_THROWS_AS(ExperimentConfig::from_json(nested_unknown), ConfigError);

  nlohmann::json missing = j;
  missing.erase("seed");
  REQUIRE_THROWS_AS(ExperimentConfig::from_json(missing), ConfigError);

  nlohmann::json bad_version = j;
  bad_version["schema_version"] = 99;
  REQUIRE_THROWS_AS(ExperimentConfig::from_json(bad_version), ConfigError);

  nlohmann::json bad_value = j;
  bad_value["flow_training"]["batch_size"] = 0;
  REQUIRE_THROWS_AS(ExperimentConfig::from_json(bad_value), ConfigError);

  nlohmann::json bad_experiment = j;
  bad_experiment["experiment"] = "alanine";
  REQUIRE_THROWS_AS(ExperimentConfig::from_json(bad_experiment), ConfigError);
}

TEST_CASE("format_double renders round-trippable decimals") {
  Rng rng(79);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-12.0, 12.0));
    const std::string s = format_double(v);
    REQUIRE(std::strtod(s.c_str(), nullptr) == v);
  }
}
