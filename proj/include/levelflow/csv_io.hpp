#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "levelflow/dataset.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/evaluation.hpp"
#include "levelflow/mean_force.hpp"

namespace levelflow {

//! Decimal rendering used for every numeric CSV artifact: 17 significant
//! digits, enough to round-trip IEEE doubles exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw IoError("malformed number '" + s + "' in " + path.string());
  }
  return v;
}

}  // namespace detail

//! Sidecar path of a dataset file: same basename with the .meta suffix.
inline std::filesystem::path meta_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".meta");
  return p;
}

inline void write_dataset_meta(const std::filesystem::path& csv_path, const DatasetMeta& meta) {
  nlohmann::json j;
  j["source"] = meta.source;
  j["potential"] = meta.potential;
  j["cv"] = meta.cv;
  j["seed"] = meta.seed;
  if (meta.config_json.empty()) {
    j["config"] = nullptr;
  } else {
    j["config"] = nlohmann::json::parse(meta.config_json, nullptr, false);
    if (j["config"].is_discarded()) j["config"] = meta.config_json;
  }
  auto out = detail::open_out(meta_path(csv_path));
  out << j.dump(2) << "\n";
}

namespace detail {

inline void write_rows(std::ofstream& out, const Dataset& data, const Vector* weights) {
  out << "x0";
  for (std::size_t c = 1; c < data.dim; ++c) out << ",x" << c;
  if (weights) out << ",weight";
  out << "\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.row(r);
    for (std::size_t c = 0; c < data.dim; ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    if (weights) out << ',' << format_double((*weights)[r]);
    out << "\n";
  }
}

}  // namespace detail

inline void write_dataset_csv(const std::filesystem::path& path, const Dataset& data,
                              bool with_meta = true) {
  auto out = detail::open_out(path);
  detail::write_rows(out, data, nullptr);
  if (!out) throw IoError("write failed: " + path.string());
  if (with_meta) write_dataset_meta(path, data.meta);
}

inline void write_weighted_dataset_csv(const std::filesystem::path& path,
                                       const WeightedDataset& data, bool with_meta = true) {
  if (data.weights.size() != data.points.size()) {
    throw ShapeError("write_weighted_dataset_csv: weight count mismatch");
  }
  auto out = detail::open_out(path);
  detail::write_rows(out, data.points, &data.weights);
  if (!out) throw IoError("write failed: " + path.string());
  if (with_meta) write_dataset_meta(path, data.points.meta);
}

//! Reads a dataset CSV; a trailing "weight" column is returned separately
//! (empty when absent).
inline WeightedDataset read_dataset_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file: " + path.string());
  const auto header = detail::split_csv_line(line);
  bool weighted = !header.empty() && header.back() == "weight";
  const std::size_t dim = header.size() - (weighted ? 1 : 0);
  if (dim == 0) throw IoError("dataset has no coordinate columns: " + path.string());
  for (std::size_t c = 0; c < dim; ++c) {
    if (header[c] != "x" + std::to_string(c)) {
      throw IoError("unexpected dataset header in " + path.string());
    }
  }
  WeightedDataset out;
  out.points.dim = dim;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw IoError("row width mismatch in " + path.string());
    }
    for (std::size_t c = 0; c < dim; ++c) {
      out.points.values.push_back(detail::parse_double(fields[c], path));
    }
    if (weighted) out.weights.push_back(detail::parse_double(fields[dim], path));
  }
  return out;
}

inline void write_mean_force_grid_csv(const std::filesystem::path& path,
                                      const MeanForceGrid& grid) {
  auto out = detail::open_out(path);
  out << "cell_center,visit_count,mean_force\n";
  for (std::size_t i = 0; i < grid.n_cells(); ++i) {
    out << format_double(grid.cell_center(i)) << ',' << grid.visit_count(i) << ','
        << format_double(grid.mean_force(i)) << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_deviation_curve_csv(const std::filesystem::path& path,
                                      const DeviationCurve& curve) {
  auto out = detail::open_out(path);
  out << "z,deviation,n\n";
  for (std::size_t i = 0; i < curve.z_values.size(); ++i) {
    out << format_double(curve.z_values[i]) << ',' << format_double(curve.deviation[i]) << ','
        << curve.n_samples << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_mean_cv_curve_csv(const std::filesystem::path& path,
                                    const DeviationCurve& curve) {
  auto out = detail::open_out(path);
  out << "z,mean_cv,n\n";
  for (std::size_t i = 0; i < curve.z_values.size(); ++i) {
    out << format_double(curve.z_values[i]) << ',' << format_double(curve.mean_cv[i]) << ','
        << curve.n_samples << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_proportion_curve_csv(const std::filesystem::path& path, const Vector& z_values,
                                       const Vector& proportions, std::size_t n_samples) {
  if (z_values.size() != proportions.size()) {
    throw ShapeError("write_proportion_curve_csv: length mismatch");
  }
  auto out = detail::open_out(path);
  out << "z,proportion,n\n";
  for (std::size_t i = 0; i < z_values.size(); ++i) {
    out << format_double(z_values[i]) << ',' << format_double(proportions[i]) << ',' << n_samples
        << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_density_csv(const std::filesystem::path& path, const Density1D& density) {
  auto out = detail::open_out(path);
  out << "bin_left,bin_right,mass\n";
  for (std::size_t i = 0; i < density.n_bins(); ++i) {
    out << format_double(density.bin_edges[i]) << ',' << format_double(density.bin_edges[i + 1])
        << ',' << format_double(density.mass[i]) << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

struct ComparisonRow {
  std::string metric;
  std::string model_a;
  std::string model_b;
  double value = 0.0;
};

inline void write_comparison_csv(const std::filesystem::path& path,
                                 const std::vector<ComparisonRow>& rows) {
  auto out = detail::open_out(path);
  out << "metric,model_a,model_b,value\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << r.model_a << ',' << r.model_b << ',' << format_double(r.value)
        << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

//! Per-point projection report: residual, steps and convergence flag.
inline void write_projection_report_csv(const std::filesystem::path& path,
                                        const std::vector<ProjectionResult>& results) {
  auto out = detail::open_out(path);
  out << "index,residual,steps,converged\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    out << i << ',' << format_double(results[i].residual) << ',' << results[i].steps_used << ','
        << (results[i].converged ? 1 : 0) << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace levelflow
