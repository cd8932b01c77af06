#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "levelflow/errors.hpp"

namespace levelflow {

inline constexpr int kConfigSchemaVersion = 1;

namespace detail {

//! Strict JSON object reader: every key must be consumed, unknown keys are
//! rejected when done() runs.
class StrictObject {
 public:
  StrictObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError("config: " + path_ + " must be an object");
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("config: missing key " + path_ + "." + key);
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config: bad value type at " + path_ + "." + key);
    }
  }

  template <typename T>
  T value_or(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config: bad value type at " + path_ + "." + key);
    }
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return std::nullopt;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config: bad value type at " + path_ + "." + key);
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const nlohmann::json& child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("config: missing section " + path_ + "." + key);
    return j_.at(key);
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        throw ConfigError("config: unknown key " + path_ + "." + it.key());
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

struct CirclesConfig {
  std::size_t n_samples = 10000;
  double outer_radius = 1.0;
  double inner_radius = 0.5;
  double noise_sigma = 0.05;
};

struct LangevinSection {
  double step_size = 2.0e-4;
  double beta = 0.1;
  std::size_t n_steps = 3000000;
  std::size_t record_every = 100;
  std::vector<double> initial_point{-0.6, 1.2};
};

struct AutoencoderSection {
  std::vector<std::size_t> encoder_hidden{32, 32, 32};
  std::vector<std::size_t> decoder_hidden{32};
  std::size_t epochs = 200;
  std::size_t batch_size = 128;
  double learning_rate = 1.0e-3;
  //! Calibrated output range: the dataset's raw CV range is mapped affinely
  //! onto [target_lo, target_hi], oriented so the trajectory start point
  //! lands in the upper half.
  double target_lo = -2.6;
  double target_hi = 3.5;
};

struct AbfSection {
  std::size_t n_steps = 150000;
  std::size_t equilibration_steps = 50000;
  std::size_t record_every = 10;
  double grid_lo = -2.6;
  double grid_hi = 3.5;
  std::size_t n_cells = 61;
  std::size_t activation_threshold = 100;
};

struct FlowTrainingSection {
  std::size_t epochs = 1000;
  std::size_t batch_size = 1000;
  double learning_rate = 1.0e-3;
  double weight_decay = 1.0e-4;
  std::optional<std::size_t> patience;
  std::vector<std::size_t> hidden_dims{128, 128};
};

struct GenerationSection {
  std::size_t n_samples = 1000;
  std::size_t n_time_steps = 1000;
  std::vector<double> z_values;
};

struct ProjectionSection {
  double step_size = 0.01;
  std::size_t max_steps = 7000;
  double tolerance = 1.0e-3;
};

struct ConstrainedSection {
  double z = -2.0;
  std::size_t n_steps = 50000;
  std::size_t record_every = 1;
  double step_size = 2.0e-4;
  double tolerance = 1.0e-5;
};

struct EvaluationSection {
  std::size_t z_grid_points = 20;
  double z_margin = 0.05;
  //! Explicit grid range; when unset the grid is the dataset CV range
  //! extended by z_margin.
  std::optional<double> z_grid_lo;
  std::optional<double> z_grid_hi;
  std::size_t n_bins = 64;
  std::size_t deviation_n_samples = 1000;
};

struct ExperimentConfig {
  std::string experiment;  // "circles2d" | "mueller_brown"
  std::uint64_t seed = 0;
  std::string output_dir;

  CirclesConfig circles;
  LangevinSection langevin;
  AutoencoderSection autoencoder;
  AbfSection abf;
  FlowTrainingSection flow_training;
  GenerationSection generation;
  ProjectionSection projection;
  ConstrainedSection constrained;
  EvaluationSection evaluation;

  void validate() const {
    if (experiment != "circles2d" && experiment != "mueller_brown") {
      throw ConfigError("config: experiment must be circles2d or mueller_brown");
    }
    if (output_dir.empty()) throw ConfigError("config: output_dir must be set");
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0)) throw ConfigError(std::string("config: ") + what + " must be > 0");
    };
    positive(circles.outer_radius, "circles.outer_radius");
    positive(circles.inner_radius, "circles.inner_radius");
    if (circles.noise_sigma < 0.0) throw ConfigError("config: circles.noise_sigma must be >= 0");
    if (circles.n_samples == 0) throw ConfigError("config: circles.n_samples must be positive");
    positive(langevin.step_size, "langevin.step_size");
    positive(langevin.beta, "langevin.beta");
    if (langevin.n_steps == 0 || langevin.record_every == 0) {
      throw ConfigError("config: langevin step counts must be positive");
    }
    if (langevin.initial_point.empty()) {
      throw ConfigError("config: langevin.initial_point must be non-empty");
    }
    if (autoencoder.epochs > 0 && autoencoder.batch_size == 0) {
      throw ConfigError("config: autoencoder.batch_size must be positive");
    }
    if (!(autoencoder.target_hi > autoencoder.target_lo)) {
      throw ConfigError("config: autoencoder target range is degenerate");
    }
    if (abf.n_steps == 0 || abf.record_every == 0) {
      throw ConfigError("config: abf step counts must be positive");
    }
    if (abf.equilibration_steps >= abf.n_steps) {
      throw ConfigError("config: abf.equilibration_steps must be below abf.n_steps");
    }
    if (!(abf.grid_hi > abf.grid_lo)) throw ConfigError("config: abf grid range is degenerate");
    if (abf.n_cells == 0 || abf.activation_threshold == 0) {
      throw ConfigError("config: abf grid cells and threshold must be positive");
    }
    if (flow_training.batch_size == 0) {
      throw ConfigError("config: flow_training.batch_size must be positive");
    }
    positive(flow_training.learning_rate, "flow_training.learning_rate");
    if (flow_training.weight_decay < 0.0) {
      throw ConfigError("config: flow_training.weight_decay must be >= 0");
    }
    if (generation.n_samples == 0) throw ConfigError("config: generation.n_samples must be > 0");
    positive(projection.step_size, "projection.step_size");
    positive(projection.tolerance, "projection.tolerance");
    if (projection.max_steps == 0) throw ConfigError("config: projection.max_steps must be > 0");
    positive(constrained.step_size, "constrained.step_size");
    positive(constrained.tolerance, "constrained.tolerance");
    if (constrained.n_steps == 0 || constrained.record_every == 0) {
      throw ConfigError("config: constrained step counts must be positive");
    }
    if (evaluation.z_grid_points < 2) {
      throw ConfigError("config: evaluation.z_grid_points must be >= 2");
    }
    if (evaluation.n_bins == 0 || evaluation.deviation_n_samples == 0) {
      throw ConfigError("config: evaluation bin and sample counts must be positive");
    }
    if (evaluation.z_grid_lo.has_value() != evaluation.z_grid_hi.has_value()) {
      throw ConfigError("config: evaluation.z_grid_lo/hi must be set together");
    }
    if (evaluation.z_grid_lo && !(*evaluation.z_grid_hi > *evaluation.z_grid_lo)) {
      throw ConfigError("config: evaluation z grid range is degenerate");
    }
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    detail::StrictObject root(j, "$");
    const int version = root.require<int>("schema_version");
    if (version != kConfigSchemaVersion) {
      throw ConfigError("config: unsupported schema_version " + std::to_string(version));
    }
    c.experiment = root.require<std::string>("experiment");
    c.seed = root.require<std::uint64_t>("seed");
    c.output_dir = root.require<std::string>("output_dir");

    if (root.has("circles")) {
      detail::StrictObject s(root.child("circles"), "circles");
      c.circles.n_samples = s.value_or<std::size_t>("n_samples", c.circles.n_samples);
      c.circles.outer_radius = s.value_or<double>("outer_radius", c.circles.outer_radius);
      c.circles.inner_radius = s.value_or<double>("inner_radius", c.circles.inner_radius);
      c.circles.noise_sigma = s.value_or<double>("noise_sigma", c.circles.noise_sigma);
      s.done();
    }
    if (root.has("langevin")) {
      detail::StrictObject s(root.child("langevin"), "langevin");
      c.langevin.step_size = s.value_or<double>("step_size", c.langevin.step_size);
      c.langevin.beta = s.value_or<double>("beta", c.langevin.beta);
      c.langevin.n_steps = s.value_or<std::size_t>("n_steps", c.langevin.n_steps);
      c.langevin.record_every = s.value_or<std::size_t>("record_every", c.langevin.record_every);
      c.langevin.initial_point =
          s.value_or<std::vector<double>>("initial_point", c.langevin.initial_point);
      s.done();
    }
    if (root.has("autoencoder")) {
      detail::StrictObject s(root.child("autoencoder"), "autoencoder");
      c.autoencoder.encoder_hidden =
          s.value_or<std::vector<std::size_t>>("encoder_hidden", c.autoencoder.encoder_hidden);
      c.autoencoder.decoder_hidden =
          s.value_or<std::vector<std::size_t>>("decoder_hidden", c.autoencoder.decoder_hidden);
      c.autoencoder.epochs = s.value_or<std::size_t>("epochs", c.autoencoder.epochs);
      c.autoencoder.batch_size = s.value_or<std::size_t>("batch_size", c.autoencoder.batch_size);
      c.autoencoder.learning_rate =
          s.value_or<double>("learning_rate", c.autoencoder.learning_rate);
      c.autoencoder.target_lo = s.value_or<double>("target_lo", c.autoencoder.target_lo);
      c.autoencoder.target_hi = s.value_or<double>("target_hi", c.autoencoder.target_hi);
      s.done();
    }
    if (root.has("abf")) {
      detail::StrictObject s(root.child("abf"), "abf");
      c.abf.n_steps = s.value_or<std::size_t>("n_steps", c.abf.n_steps);
      c.abf.equilibration_steps =
          s.value_or<std::size_t>("equilibration_steps", c.abf.equilibration_steps);
      c.abf.record_every = s.value_or<std::size_t>("record_every", c.abf.record_every);
      c.abf.grid_lo = s.value_or<double>("grid_lo", c.abf.grid_lo);
      c.abf.grid_hi = s.value_or<double>("grid_hi", c.abf.grid_hi);
      c.abf.n_cells = s.value_or<std::size_t>("n_cells", c.abf.n_cells);
      c.abf.activation_threshold =
          s.value_or<std::size_t>("activation_threshold", c.abf.activation_threshold);
      s.done();
    }
    if (root.has("flow_training")) {
      detail::StrictObject s(root.child("flow_training"), "flow_training");
      c.flow_training.epochs = s.value_or<std::size_t>("epochs", c.flow_training.epochs);
      c.flow_training.batch_size =
          s.value_or<std::size_t>("batch_size", c.flow_training.batch_size);
      c.flow_training.learning_rate =
          s.value_or<double>("learning_rate", c.flow_training.learning_rate);
      c.flow_training.weight_decay =
          s.value_or<double>("weight_decay", c.flow_training.weight_decay);
      c.flow_training.patience = s.optional<std::size_t>("patience");
      c.flow_training.hidden_dims =
          s.value_or<std::vector<std::size_t>>("hidden_dims", c.flow_training.hidden_dims);
      s.done();
    }
    if (root.has("generation")) {
      detail::StrictObject s(root.child("generation"), "generation");
      c.generation.n_samples = s.value_or<std::size_t>("n_samples", c.generation.n_samples);
      c.generation.n_time_steps =
          s.value_or<std::size_t>("n_time_steps", c.generation.n_time_steps);
      c.generation.z_values = s.value_or<std::vector<double>>("z_values", c.generation.z_values);
      s.done();
    }
    if (root.has("projection")) {
      detail::StrictObject s(root.child("projection"), "projection");
      c.projection.step_size = s.value_or<double>("step_size", c.projection.step_size);
      c.projection.max_steps = s.value_or<std::size_t>("max_steps", c.projection.max_steps);
      c.projection.tolerance = s.value_or<double>("tolerance", c.projection.tolerance);
      s.done();
    }
    if (root.has("constrained")) {
      detail::StrictObject s(root.child("constrained"), "constrained");
      c.constrained.z = s.value_or<double>("z", c.constrained.z);
      c.constrained.n_steps = s.value_or<std::size_t>("n_steps", c.constrained.n_steps);
      c.constrained.record_every =
          s.value_or<std::size_t>("record_every", c.constrained.record_every);
      c.constrained.step_size = s.value_or<double>("step_size", c.constrained.step_size);
      c.constrained.tolerance = s.value_or<double>("tolerance", c.constrained.tolerance);
      s.done();
    }
    if (root.has("evaluation")) {
      detail::StrictObject s(root.child("evaluation"), "evaluation");
      c.evaluation.z_grid_points =
          s.value_or<std::size_t>("z_grid_points", c.evaluation.z_grid_points);
      c.evaluation.z_margin = s.value_or<double>("z_margin", c.evaluation.z_margin);
      c.evaluation.z_grid_lo = s.optional<double>("z_grid_lo");
      c.evaluation.z_grid_hi = s.optional<double>("z_grid_hi");
      c.evaluation.n_bins = s.value_or<std::size_t>("n_bins", c.evaluation.n_bins);
      c.evaluation.deviation_n_samples =
          s.value_or<std::size_t>("deviation_n_samples", c.evaluation.deviation_n_samples);
      s.done();
    }
    root.done();
    c.validate();
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["circles"] = {{"n_samples", circles.n_samples},
                    {"outer_radius", circles.outer_radius},
                    {"inner_radius", circles.inner_radius},
                    {"noise_sigma", circles.noise_sigma}};
    j["langevin"] = {{"step_size", langevin.step_size},
                     {"beta", langevin.beta},
                     {"n_steps", langevin.n_steps},
                     {"record_every", langevin.record_every},
                     {"initial_point", langevin.initial_point}};
    j["autoencoder"] = {{"encoder_hidden", autoencoder.encoder_hidden},
                        {"decoder_hidden", autoencoder.decoder_hidden},
                        {"epochs", autoencoder.epochs},
                        {"batch_size", autoencoder.batch_size},
                        {"learning_rate", autoencoder.learning_rate},
                        {"target_lo", autoencoder.target_lo},
                        {"target_hi", autoencoder.target_hi}};
    j["abf"] = {{"n_steps", abf.n_steps},
                {"equilibration_steps", abf.equilibration_steps},
                {"record_every", abf.record_every},
                {"grid_lo", abf.grid_lo},
                {"grid_hi", abf.grid_hi},
                {"n_cells", abf.n_cells},
                {"activation_threshold", abf.activation_threshold}};
    j["flow_training"] = {{"epochs", flow_training.epochs},
                          {"batch_size", flow_training.batch_size},
                          {"learning_rate", flow_training.learning_rate},
                          {"weight_decay", flow_training.weight_decay},
                          {"hidden_dims", flow_training.hidden_dims}};
    if (flow_training.patience) {
      j["flow_training"]["patience"] = *flow_training.patience;
    }
    j["generation"] = {{"n_samples", generation.n_samples},
                       {"n_time_steps", generation.n_time_steps},
                       {"z_values", generation.z_values}};
    j["projection"] = {{"step_size", projection.step_size},
                       {"max_steps", projection.max_steps},
                       {"tolerance", projection.tolerance}};
    j["constrained"] = {{"z", constrained.z},
                        {"n_steps", constrained.n_steps},
                        {"record_every", constrained.record_every},
                        {"step_size", constrained.step_size},
                        {"tolerance", constrained.tolerance}};
    j["evaluation"] = {{"z_grid_points", evaluation.z_grid_points},
                       {"z_margin", evaluation.z_margin},
                       {"n_bins", evaluation.n_bins},
                       {"deviation_n_samples", evaluation.deviation_n_samples}};
    if (evaluation.z_grid_lo) j["evaluation"]["z_grid_lo"] = *evaluation.z_grid_lo;
    if (evaluation.z_grid_hi) j["evaluation"]["z_grid_hi"] = *evaluation.z_grid_hi;
    return j;
  }

  static ExperimentConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
    return from_json(j);
  }

  //! Paper-faithful defaults for the 2D circles experiment.
  static ExperimentConfig circles2d_default() {
    ExperimentConfig c;
    c.experiment = "circles2d";
    c.seed = 2024;
    c.output_dir = "runs/circles2d";
    c.flow_training.epochs = 1000;
    c.flow_training.patience = 200;
    c.flow_training.batch_size = 1000;
    c.flow_training.weight_decay = 1.0e-4;
    c.flow_training.hidden_dims = {128, 128};
    c.generation.n_time_steps = 1000;
    c.evaluation.z_grid_points = 20;
    c.evaluation.deviation_n_samples = 1000;
    return c;
  }

  //! Paper-faithful defaults for the Mueller-Brown experiment.
  static ExperimentConfig mueller_brown_default() {
    ExperimentConfig c;
    c.experiment = "mueller_brown";
    c.seed = 2024;
    c.output_dir = "runs/mueller_brown";
    c.flow_training.epochs = 3000;
    c.flow_training.patience.reset();
    c.flow_training.batch_size = 512;
    c.flow_training.weight_decay = 0.0;
    c.flow_training.hidden_dims = {128, 128, 128};
    c.generation.n_samples = 1000;
    c.generation.n_time_steps = 100;
    c.generation.z_values = {-2.0, 0.0, 2.0};
    c.evaluation.z_grid_points = 30;
    c.evaluation.z_grid_lo = -2.9;
    c.evaluation.z_grid_hi = 3.6;
    c.evaluation.deviation_n_samples = 1000;
    return c;
  }
};

}  // namespace levelflow
