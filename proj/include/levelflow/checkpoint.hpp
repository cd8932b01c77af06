#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "levelflow/cv_map.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/flow_model.hpp"
#include "levelflow/mlp.hpp"

namespace levelflow {

//! Checkpoints are self-describing JSON documents. Common layout:
//!   schema_version : 1
//!   kind           : "mlp" | "encoder_cv" | "flow_model"
//!   layer_dims     : [..]
//!   weights        : per-layer row-major flattened matrices
//!   biases         : per-layer vectors
//! "encoder_cv" adds out_scale/out_shift (the output affine calibration);
//! "flow_model" adds d, k and the x/z standardization statistics.
inline constexpr int kCheckpointSchemaVersion = 1;

namespace detail {

inline nlohmann::json mlp_to_json(const MlpParams& p) {
  nlohmann::json j;
  j["layer_dims"] = p.layer_dims;
  auto& w = j["weights"] = nlohmann::json::array();
  for (const auto& m : p.weights) w.push_back(m.data);
  j["biases"] = p.biases;
  return j;
}

inline MlpParams mlp_from_json(const nlohmann::json& j) {
  MlpParams p = MlpParams::zeros(j.at("layer_dims").get<std::vector<std::size_t>>());
  const auto& w = j.at("weights");
  const auto& b = j.at("biases");
  if (w.size() != p.n_layers() || b.size() != p.n_layers()) {
    throw IoError("checkpoint: layer count mismatch");
  }
  for (std::size_t l = 0; l < p.n_layers(); ++l) {
    const auto flat = w[l].get<std::vector<double>>();
    if (flat.size() != p.weights[l].data.size()) throw IoError("checkpoint: weight size mismatch");
    p.weights[l].data = flat;
    const auto bias = b[l].get<std::vector<double>>();
    if (bias.size() != p.biases[l].size()) throw IoError("checkpoint: bias size mismatch");
    p.biases[l] = bias;
  }
  p.validate();
  return p;
}

inline void write_checkpoint_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out << j.dump(1) << "\n";
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

inline nlohmann::json read_checkpoint_file(const std::filesystem::path& path,
                                           const std::string& expected_kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IoError("checkpoint is not valid JSON: " + path.string());
  if (j.value("schema_version", -1) != kCheckpointSchemaVersion) {
    throw IoError("unsupported checkpoint schema in " + path.string());
  }
  if (j.value("kind", "") != expected_kind) {
    throw IoError("checkpoint kind mismatch in " + path.string() + ": expected " + expected_kind);
  }
  return j;
}

}  // namespace detail

inline void save_mlp_checkpoint(const std::filesystem::path& path, const MlpParams& p) {
  nlohmann::json j = detail::mlp_to_json(p);
  j["schema_version"] = kCheckpointSchemaVersion;
  j["kind"] = "mlp";
  detail::write_checkpoint_file(path, j);
}

inline MlpParams load_mlp_checkpoint(const std::filesystem::path& path) {
  return detail::mlp_from_json(detail::read_checkpoint_file(path, "mlp"));
}

inline void save_encoder_cv_checkpoint(const std::filesystem::path& path, const EncoderCv& enc) {
  nlohmann::json j = detail::mlp_to_json(enc.net);
  j["schema_version"] = kCheckpointSchemaVersion;
  j["kind"] = "encoder_cv";
  j["out_scale"] = enc.out_scale;
  j["out_shift"] = enc.out_shift;
  detail::write_checkpoint_file(path, j);
}

inline EncoderCv load_encoder_cv_checkpoint(const std::filesystem::path& path) {
  const nlohmann::json j = detail::read_checkpoint_file(path, "encoder_cv");
  EncoderCv enc = EncoderCv::from_net(detail::mlp_from_json(j));
  enc.out_scale = j.at("out_scale").get<Vector>();
  enc.out_shift = j.at("out_shift").get<Vector>();
  if (enc.out_scale.size() != enc.net.output_dim() ||
      enc.out_shift.size() != enc.net.output_dim()) {
    throw IoError("checkpoint: affine size mismatch in " + path.string());
  }
  return enc;
}

inline void save_flow_checkpoint(const std::filesystem::path& path, const FlowModel& fm) {
  nlohmann::json j = detail::mlp_to_json(fm.net);
  j["schema_version"] = kCheckpointSchemaVersion;
  j["kind"] = "flow_model";
  j["d"] = fm.d;
  j["k"] = fm.k;
  j["x_mean"] = fm.x_stats.mean;
  j["x_std"] = fm.x_stats.std;
  j["z_mean"] = fm.z_stats.mean;
  j["z_std"] = fm.z_stats.std;
  detail::write_checkpoint_file(path, j);
}

inline FlowModel load_flow_checkpoint(const std::filesystem::path& path) {
  const nlohmann::json j = detail::read_checkpoint_file(path, "flow_model");
  FlowModel fm;
  fm.net = detail::mlp_from_json(j);
  fm.d = j.at("d").get<std::size_t>();
  fm.k = j.at("k").get<std::size_t>();
  fm.x_stats.mean = j.at("x_mean").get<Vector>();
  fm.x_stats.std = j.at("x_std").get<Vector>();
  fm.z_stats.mean = j.at("z_mean").get<Vector>();
  fm.z_stats.std = j.at("z_std").get<Vector>();
  fm.validate();
  return fm;
}

}  // namespace levelflow
