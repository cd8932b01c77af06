#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "levelflow/abf.hpp"
#include "levelflow/autoencoder.hpp"
#include "levelflow/checkpoint.hpp"
#include "levelflow/config.hpp"
#include "levelflow/constrained.hpp"
#include "levelflow/csv_io.hpp"
#include "levelflow/evaluation.hpp"
#include "levelflow/flow_model.hpp"
#include "levelflow/langevin.hpp"
#include "levelflow/projection.hpp"

namespace levelflow::pipeline {

namespace fs = std::filesystem;

//! Deterministic per-stage RNG streams derived from the experiment seed.
enum class Stage : std::uint64_t {
  dataset = 0,
  autoencoder = 1,
  abf = 2,
  flow_unbiased = 3,
  flow_abf = 4,
  generation = 5,
  constrained = 6,
  evaluation = 7,
};

inline std::uint64_t stage_seed(const ExperimentConfig& cfg, Stage stage) {
  return Rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(stage));
}

//! Fixed file layout of one run directory.
struct RunLayout {
  fs::path root;

  explicit RunLayout(fs::path r) : root(std::move(r)) {}

  fs::path datasets() const { return root / "datasets"; }
  fs::path checkpoints() const { return root / "checkpoints"; }
  fs::path generated() const { return root / "generated"; }
  fs::path metrics() const { return root / "metrics"; }

  void ensure_dirs() const {
    fs::create_directories(datasets());
    fs::create_directories(checkpoints());
    fs::create_directories(generated());
    fs::create_directories(metrics());
  }

  fs::path dataset_file(const std::string& name) const { return datasets() / (name + ".csv"); }
  fs::path cv_checkpoint() const { return checkpoints() / "cv.json"; }
  fs::path flow_checkpoint(const std::string& variant) const {
    return checkpoints() / ("flow_" + variant + ".json");
  }
};

inline std::string z_tag(double z) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", z);
  return buf;
}

//! Two concentric noisy circles with equal class proportions; the first half
//! of the rows is the outer ring. Ring angles are equispaced per ring (as in
//! the reference generator) and isotropic Gaussian noise is added per
//! coordinate, two normal draws per point in row order.
inline Dataset make_circles_dataset(const CirclesConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Dataset out(2);
  out.reserve(cfg.n_samples);
  out.meta.source = "circles";
  out.meta.cv = "radial";
  out.meta.seed = seed;
  const std::size_t n_outer = cfg.n_samples - cfg.n_samples / 2;
  const std::size_t n_inner = cfg.n_samples - n_outer;
  Vector p(2);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const bool outer = i < n_outer;
    const double r = outer ? cfg.outer_radius : cfg.inner_radius;
    const std::size_t idx = outer ? i : i - n_outer;
    const std::size_t count = outer ? n_outer : n_inner;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(idx) /
                         static_cast<double>(count);
    p[0] = r * std::cos(angle) + cfg.noise_sigma * rng.normal();
    p[1] = r * std::sin(angle) + cfg.noise_sigma * rng.normal();
    out.push_back(p);
  }
  return out;
}

inline CvMap load_cv_map(const ExperimentConfig& cfg, const RunLayout& run) {
  if (cfg.experiment == "circles2d") return RadialCv{};
  return load_encoder_cv_checkpoint(run.cv_checkpoint());
}

namespace detail {

inline LangevinConfig langevin_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  LangevinConfig lc;
  lc.step_size = cfg.langevin.step_size;
  lc.beta = cfg.langevin.beta;
  lc.n_steps = cfg.langevin.n_steps;
  lc.record_every = cfg.langevin.record_every;
  lc.seed = seed;
  lc.initial_point = cfg.langevin.initial_point;
  return lc;
}

inline void write_loss_history_csv(const fs::path& path, const std::vector<double>& losses) {
  auto out = levelflow::detail::open_out(path);
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) {
    out << e << ',' << format_double(losses[e]) << "\n";
  }
}

}  // namespace detail

//! make-dataset. Variants: "" (experiment default: circles or unbiased
//! Langevin), "abf" and "constrained" for mueller_brown; the latter two need
//! the CV checkpoint.
inline std::vector<fs::path> cmd_make_dataset(const ExperimentConfig& cfg, const RunLayout& run,
                                              const std::string& variant = "") {
  cfg.validate();
  std::vector<fs::path> written;
  if (cfg.experiment == "circles2d") {
    if (!variant.empty()) throw ConfigError("make-dataset: circles2d has no variant " + variant);
    Dataset data = make_circles_dataset(cfg.circles, stage_seed(cfg, Stage::dataset));
    data.meta.config_json = cfg.to_json()["circles"].dump();
    run.ensure_dirs();
    const fs::path path = run.dataset_file("circles");
    write_dataset_csv(path, data);
    written.push_back(path);
    return written;
  }
  const Potential potential = MuellerBrown{};
  if (variant.empty() || variant == "unbiased") {
    const LangevinConfig lc = detail::langevin_config(cfg, stage_seed(cfg, Stage::dataset));
    Dataset data = sample_langevin(potential, lc);
    data.meta.config_json = cfg.to_json()["langevin"].dump();
    run.ensure_dirs();
    const fs::path path = run.dataset_file("unbiased");
    write_dataset_csv(path, data);
    written.push_back(path);
  } else if (variant == "abf") {
    const CvMap cv = load_cv_map(cfg, run);
    LangevinConfig lc = detail::langevin_config(cfg, stage_seed(cfg, Stage::abf));
    lc.n_steps = cfg.abf.n_steps;
    lc.record_every = cfg.abf.record_every;
    MeanForceGridSpec grid;
    grid.lo = {cfg.abf.grid_lo};
    grid.hi = {cfg.abf.grid_hi};
    grid.n_cells = cfg.abf.n_cells;
    grid.activation_threshold = cfg.abf.activation_threshold;
    AbfResult res = sample_abf(potential, cv, lc, grid, cfg.abf.equilibration_steps);
    res.data.meta.config_json = cfg.to_json()["abf"].dump();
    run.ensure_dirs();
    const fs::path path = run.dataset_file("abf");
    write_dataset_csv(path, res.data);
    write_mean_force_grid_csv(run.dataset_file("abf_grid"), res.grid);
    written.push_back(path);
    written.push_back(run.dataset_file("abf_grid"));
  } else if (variant == "constrained") {
    const CvMap cv = load_cv_map(cfg, run);
    LangevinConfig lc = detail::langevin_config(cfg, stage_seed(cfg, Stage::constrained));
    lc.step_size = cfg.constrained.step_size;
    lc.n_steps = cfg.constrained.n_steps;
    lc.record_every = cfg.constrained.record_every;
    ProjectionConfig proj{cfg.projection.step_size, cfg.projection.max_steps,
                          cfg.constrained.tolerance};
    WeightedDataset data =
        sample_constrained(potential, cv, {cfg.constrained.z}, lc, cfg.constrained.tolerance, proj);
    data.points.meta.config_json = cfg.to_json()["constrained"].dump();
    run.ensure_dirs();
    const fs::path path = run.dataset_file("constrained_z" + z_tag(cfg.constrained.z));
    write_weighted_dataset_csv(path, data);
    written.push_back(path);
  } else {
    throw ConfigError("make-dataset: unknown variant " + variant);
  }
  return written;
}

//! train-cv (mueller_brown): trains the autoencoder on the unbiased dataset,
//! calibrates the encoder output range onto [target_lo, target_hi] oriented
//! so the trajectory start point lands in the upper half, and writes the CV
//! checkpoint plus the training loss log.
inline fs::path cmd_train_cv(const ExperimentConfig& cfg, const RunLayout& run) {
  cfg.validate();
  if (cfg.experiment != "mueller_brown") {
    throw ConfigError("train-cv: the radial CV of circles2d needs no checkpoint");
  }
  const Dataset data = read_dataset_csv(run.dataset_file("unbiased")).points;
  if (data.empty()) throw ConfigError("train-cv: unbiased dataset is empty");

  AutoencoderConfig ac;
  ac.encoder_dims.push_back(data.dim);
  for (std::size_t h : cfg.autoencoder.encoder_hidden) ac.encoder_dims.push_back(h);
  ac.encoder_dims.push_back(1);
  ac.decoder_dims.push_back(1);
  for (std::size_t h : cfg.autoencoder.decoder_hidden) ac.decoder_dims.push_back(h);
  ac.decoder_dims.push_back(data.dim);
  ac.epochs = cfg.autoencoder.epochs;
  ac.batch_size = cfg.autoencoder.batch_size;
  ac.learning_rate = cfg.autoencoder.learning_rate;
  ac.seed = stage_seed(cfg, Stage::autoencoder);

  AutoencoderResult res = train_autoencoder(data, ac);

  double raw_lo = std::numeric_limits<double>::infinity();
  double raw_hi = -raw_lo;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = cv_value(CvMap{res.encoder}, data.row(i))[0];
    raw_lo = std::min(raw_lo, v);
    raw_hi = std::max(raw_hi, v);
  }
  const double raw_start = cv_value(CvMap{res.encoder}, cfg.langevin.initial_point)[0];
  const bool flip = (raw_start - raw_lo) < (raw_hi - raw_start);
  calibrate_encoder_range(res.encoder, raw_lo, raw_hi, cfg.autoencoder.target_lo,
                          cfg.autoencoder.target_hi, flip);

  run.ensure_dirs();
  save_encoder_cv_checkpoint(run.cv_checkpoint(), res.encoder);
  detail::write_loss_history_csv(run.metrics() / "cv_train_loss.csv", res.loss_history);
  return run.cv_checkpoint();
}

//! train-flow. Variant "" for circles2d, "unbiased"/"abf" for mueller_brown.
inline fs::path cmd_train_flow(const ExperimentConfig& cfg, const RunLayout& run,
                               std::string variant = "") {
  cfg.validate();
  std::string dataset_name;
  Stage stage = Stage::flow_unbiased;
  if (cfg.experiment == "circles2d") {
    if (!variant.empty()) throw ConfigError("train-flow: circles2d has no variant " + variant);
    variant = "circles";
    dataset_name = "circles";
  } else {
    if (variant.empty()) variant = "unbiased";
    if (variant != "unbiased" && variant != "abf") {
      throw ConfigError("train-flow: unknown variant " + variant);
    }
    dataset_name = variant;
    stage = variant == "abf" ? Stage::flow_abf : Stage::flow_unbiased;
  }
  const Dataset data = read_dataset_csv(run.dataset_file(dataset_name)).points;
  const CvMap cv = load_cv_map(cfg, run);

  TrainConfig tc;
  tc.epochs = cfg.flow_training.epochs;
  tc.batch_size = std::min(cfg.flow_training.batch_size, data.size());
  tc.learning_rate = cfg.flow_training.learning_rate;
  tc.weight_decay = cfg.flow_training.weight_decay;
  tc.patience = cfg.flow_training.patience;
  tc.seed = stage_seed(cfg, stage);

  FlowTrainResult res = train_flow(data, cv, tc, cfg.flow_training.hidden_dims);

  run.ensure_dirs();
  const fs::path path = run.flow_checkpoint(variant);
  save_flow_checkpoint(path, res.model);
  detail::write_loss_history_csv(run.metrics() / ("flow_train_loss_" + variant + ".csv"),
                                 res.loss_history);
  return path;
}

//! generate (+ optional projection) for each target z; writes one dataset
//! per z and, when projecting, the projected dataset and per-point report.
inline std::vector<fs::path> cmd_generate(const ExperimentConfig& cfg, const RunLayout& run,
                                          const std::string& variant, std::vector<double> z_values,
                                          bool with_projection) {
  cfg.validate();
  if (z_values.empty()) z_values = cfg.generation.z_values;
  if (z_values.empty()) throw ConfigError("generate: no target z values given");
  const std::string model_variant = cfg.experiment == "circles2d" ? "circles" : variant;
  const FlowModel model = load_flow_checkpoint(run.flow_checkpoint(model_variant));
  const CvMap cv = load_cv_map(cfg, run);

  ProjectionConfig proj{cfg.projection.step_size, cfg.projection.max_steps,
                        cfg.projection.tolerance};
  const std::uint64_t master = stage_seed(cfg, Stage::generation);

  run.ensure_dirs();
  std::vector<fs::path> written;
  for (std::size_t zi = 0; zi < z_values.size(); ++zi) {
    const double z = z_values[zi];
    const std::uint64_t seed =
        Rng::derive_seed(master, zi + 1000 * (model_variant == "abf" ? 1 : 0));
    Dataset gen = generate(model, {z}, cfg.generation.n_samples, cfg.generation.n_time_steps, seed);
    gen.meta.source = "generated";
    gen.meta.cv = cv_id(cv);
    const std::string base = model_variant + "_z" + z_tag(z);
    const fs::path raw_path = run.generated() / (base + ".csv");
    write_dataset_csv(raw_path, gen);
    written.push_back(raw_path);
    if (with_projection) {
      Dataset projected = gen;
      std::vector<ProjectionResult> reports;
      reports.reserve(gen.size());
      for (std::size_t r = 0; r < gen.size(); ++r) {
        ProjectionResult pr = try_project_to_levelset(cv, {z}, gen.row(r), proj);
        std::copy(pr.point.begin(), pr.point.end(), projected.row(r).begin());
        reports.push_back(std::move(pr));
      }
      const fs::path proj_path = run.generated() / (base + "_proj.csv");
      write_dataset_csv(proj_path, projected);
      write_projection_report_csv(run.generated() / (base + "_projreport.csv"), reports);
      written.push_back(proj_path);
    }
  }
  return written;
}

//! project: reads a dataset CSV, projects every point onto Sigma_z and
//! writes the projected dataset plus the per-point report next to it.
inline std::vector<fs::path> cmd_project(const ExperimentConfig& cfg, const RunLayout& run,
                                         const fs::path& input_csv, double z) {
  cfg.validate();
  const CvMap cv = load_cv_map(cfg, run);
  Dataset data = read_dataset_csv(input_csv).points;
  if (data.empty()) throw ConfigError("project: empty input dataset");
  ProjectionConfig proj{cfg.projection.step_size, cfg.projection.max_steps,
                        cfg.projection.tolerance};
  std::vector<ProjectionResult> reports;
  reports.reserve(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    ProjectionResult pr = try_project_to_levelset(cv, {z}, data.row(r), proj);
    std::copy(pr.point.begin(), pr.point.end(), data.row(r).begin());
    reports.push_back(std::move(pr));
  }
  fs::path out_csv = input_csv;
  out_csv.replace_extension();
  fs::path report = out_csv;
  out_csv += "_proj.csv";
  report += "_projreport.csv";
  write_dataset_csv(out_csv, data, /*with_meta=*/false);
  write_projection_report_csv(report, reports);
  return {out_csv, report};
}

inline Vector evaluation_z_grid(const ExperimentConfig& cfg, const Dataset& data, const CvMap& cv) {
  if (cfg.evaluation.z_grid_lo) {
    Vector grid(cfg.evaluation.z_grid_points);
    const double lo = *cfg.evaluation.z_grid_lo;
    const double hi = *cfg.evaluation.z_grid_hi;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                         static_cast<double>(cfg.evaluation.z_grid_points - 1);
    }
    return grid;
  }
  return extended_z_grid(data, cv, cfg.evaluation.z_grid_points, cfg.evaluation.z_margin);
}

//! evaluate: metric CSVs for the experiment. circles2d gets the deviation /
//! mean-CV / proportion curves and the data CV density; mueller_brown gets
//! deviation curves for both models, CV densities of both datasets, and the
//! x1 density comparison against the weighted constrained reference at the
//! configured z.
inline std::vector<fs::path> cmd_evaluate(const ExperimentConfig& cfg, const RunLayout& run) {
  cfg.validate();
  std::vector<fs::path> written;
  const CvMap cv = load_cv_map(cfg, run);
  const std::uint64_t eval_seed = stage_seed(cfg, Stage::evaluation);

  if (cfg.experiment == "circles2d") {
    const Dataset data = read_dataset_csv(run.dataset_file("circles")).points;
    const FlowModel model = load_flow_checkpoint(run.flow_checkpoint("circles"));
    const Vector z_grid = evaluation_z_grid(cfg, data, cv);

    // One generated ensemble per z serves all three curves.
    DeviationCurve curve;
    curve.n_samples = cfg.evaluation.deviation_n_samples;
    Vector proportions;
    proportions.reserve(z_grid.size());
    for (std::size_t i = 0; i < z_grid.size(); ++i) {
      const Dataset gen = generate(model, {z_grid[i]}, curve.n_samples,
                                   cfg.generation.n_time_steps, Rng::derive_seed(eval_seed, i));
      curve.z_values.push_back(z_grid[i]);
      curve.deviation.push_back(deviation(cv, gen, {z_grid[i]}));
      curve.mean_cv.push_back(mean_cv(cv, gen));
      proportions.push_back(proportion(gen, CoordinateThreshold{0, 0.0}));
    }

    Vector cv_values(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) cv_values[i] = cv_value(cv, data.row(i))[0];
    const Density1D data_density = density_1d(
        cv_values, {}, padded_bin_edges(cv_values, cfg.evaluation.n_bins, cfg.evaluation.z_margin));

    run.ensure_dirs();
    const fs::path m = run.metrics();
    write_deviation_curve_csv(m / "deviation_curve.csv", curve);
    write_mean_cv_curve_csv(m / "mean_cv_curve.csv", curve);
    write_proportion_curve_csv(m / "proportion_curve.csv", curve.z_values, proportions,
                               curve.n_samples);
    write_density_csv(m / "cv_density.csv", data_density);
    written = {m / "deviation_curve.csv", m / "mean_cv_curve.csv", m / "proportion_curve.csv",
               m / "cv_density.csv"};
    return written;
  }

  const Dataset unbiased = read_dataset_csv(run.dataset_file("unbiased")).points;
  const Dataset biased = read_dataset_csv(run.dataset_file("abf")).points;
  const FlowModel model_unb = load_flow_checkpoint(run.flow_checkpoint("unbiased"));
  const FlowModel model_abf = load_flow_checkpoint(run.flow_checkpoint("abf"));
  const Vector z_grid = evaluation_z_grid(cfg, unbiased, cv);

  DeviationCurveConfig dc;
  dc.n_samples = cfg.evaluation.deviation_n_samples;
  dc.n_time_steps = cfg.generation.n_time_steps;
  dc.seed = eval_seed;
  const DeviationCurve curve_unb = deviation_curve(model_unb, cv, z_grid, dc);
  const DeviationCurve curve_abf = deviation_curve(model_abf, cv, z_grid, dc);

  const Vector grid_edges =
      uniform_bin_edges(cfg.abf.grid_lo, cfg.abf.grid_hi, cfg.evaluation.n_bins);
  const Density1D density_unb = cv_density(unbiased, cv, grid_edges);
  const Density1D density_abf = cv_density(biased, cv, grid_edges);

  // x1 densities at the constrained-reference level-set.
  const double z_ref = cfg.constrained.z;
  const WeightedDataset reference =
      read_dataset_csv(run.dataset_file("constrained_z" + z_tag(z_ref)));
  if (reference.weights.empty()) throw ConfigError("evaluate: constrained reference lacks weights");
  auto first_component = [](const Dataset& d) {
    Vector v(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) v[i] = d.row(i)[0];
    return v;
  };
  const Vector ref_x1 = first_component(reference.points);
  const Vector edges = padded_bin_edges(ref_x1, cfg.evaluation.n_bins);
  const Density1D ref_density = density_1d(ref_x1, reference.weights, edges);

  auto load_gen = [&](const std::string& variant, bool projected) {
    const fs::path p = run.generated() / (variant + "_z" + z_tag(z_ref) +
                                          (projected ? "_proj.csv" : ".csv"));
    return read_dataset_csv(p).points;
  };
  const Density1D unb_raw = density_1d(first_component(load_gen("unbiased", false)), {}, edges);
  const Density1D unb_proj = density_1d(first_component(load_gen("unbiased", true)), {}, edges);
  const Density1D abf_raw = density_1d(first_component(load_gen("abf", false)), {}, edges);
  const Density1D abf_proj = density_1d(first_component(load_gen("abf", true)), {}, edges);

  std::vector<ComparisonRow> rows;
  auto add_distance = [&rows](const std::string& metric, const std::string& a,
                              const std::string& b, const Density1D& da, const Density1D& db) {
    const DensityDistance dist = density_distance(da, db);
    rows.push_back({metric + "_tv", a, b, dist.total_variation});
    rows.push_back({metric + "_w1", a, b, dist.wasserstein1});
  };
  add_distance("x1_density", "unbiased_proj", "reference", unb_proj, ref_density);
  add_distance("x1_density", "abf_proj", "reference", abf_proj, ref_density);
  add_distance("x1_density", "unbiased", "unbiased_proj", unb_raw, unb_proj);
  add_distance("x1_density", "abf", "abf_proj", abf_raw, abf_proj);
  auto mean_of = [](const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  rows.push_back({"mean_deviation", "unbiased", "-", mean_of(curve_unb.deviation)});
  rows.push_back({"mean_deviation", "abf", "-", mean_of(curve_abf.deviation)});

  run.ensure_dirs();
  const fs::path m = run.metrics();
  write_deviation_curve_csv(m / "deviation_curve_unbiased.csv", curve_unb);
  write_deviation_curve_csv(m / "deviation_curve_abf.csv", curve_abf);
  write_density_csv(m / "cv_density_unbiased.csv", density_unb);
  write_density_csv(m / "cv_density_abf.csv", density_abf);
  write_density_csv(m / "density_x1_reference.csv", ref_density);
  write_density_csv(m / "density_x1_unbiased.csv", unb_raw);
  write_density_csv(m / "density_x1_unbiased_proj.csv", unb_proj);
  write_density_csv(m / "density_x1_abf.csv", abf_raw);
  write_density_csv(m / "density_x1_abf_proj.csv", abf_proj);
  write_comparison_csv(m / "comparison.csv", rows);
  written = {m / "deviation_curve_unbiased.csv",
             m / "deviation_curve_abf.csv",
             m / "cv_density_unbiased.csv",
             m / "cv_density_abf.csv",
             m / "density_x1_reference.csv",
             m / "density_x1_unbiased.csv",
             m / "density_x1_unbiased_proj.csv",
             m / "density_x1_abf.csv",
             m / "density_x1_abf_proj.csv",
             m / "comparison.csv"};
  return written;
}

//! reproduce: the full experiment pipeline into one run directory, with a
//! config snapshot first and a machine-readable manifest last.
inline void cmd_reproduce(const ExperimentConfig& cfg, const RunLayout& run) {
  cfg.validate();
  run.ensure_dirs();
  {
    std::ofstream snap(run.root / "config.json");
    if (!snap) throw IoError("cannot write config snapshot");
    snap << cfg.to_json().dump(2) << "\n";
  }
  if (cfg.experiment == "circles2d") {
    cmd_make_dataset(cfg, run);
    cmd_train_flow(cfg, run);
    cmd_evaluate(cfg, run);
  } else {
    cmd_make_dataset(cfg, run, "unbiased");
    cmd_train_cv(cfg, run);
    cmd_make_dataset(cfg, run, "abf");
    cmd_train_flow(cfg, run, "unbiased");
    cmd_train_flow(cfg, run, "abf");
    cmd_generate(cfg, run, "unbiased", {}, /*with_projection=*/true);
    cmd_generate(cfg, run, "abf", {}, /*with_projection=*/true);
    cmd_make_dataset(cfg, run, "constrained");
    cmd_evaluate(cfg, run);
  }
  // Manifest: sorted relative paths of every artifact in the run directory.
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(run.root)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
      files.push_back(fs::relative(entry.path(), run.root).generic_string());
    }
  }
  std::sort(files.begin(), files.end());
  nlohmann::json manifest;
  manifest["experiment"] = cfg.experiment;
  manifest["seed"] = cfg.seed;
  manifest["schema_version"] = kConfigSchemaVersion;
  manifest["artifacts"] = files;
  std::ofstream mf(run.root / "manifest.json");
  if (!mf) throw IoError("cannot write manifest");
  mf << manifest.dump(2) << "\n";
}

}  // namespace levelflow::pipeline
