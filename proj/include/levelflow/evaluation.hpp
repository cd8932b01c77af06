#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "levelflow/cv_map.hpp"
#include "levelflow/dataset.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/flow_model.hpp"
#include "levelflow/projection.hpp"

namespace levelflow {

//! Root-mean-square distance of the samples' CV values from the target z.
inline double deviation(const CvMap& m, const Dataset& samples, const Vector& z) {
  if (samples.empty()) throw ConfigError("deviation: empty sample set");
  if (z.size() != cv_dim(m)) throw ShapeError("deviation: z dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vector v = cv_value(m, samples.row(i));
    double sq = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double dlt = v[j] - z[j];
      sq += dlt * dlt;
    }
    sum += sq;
  }
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

//! Mean CV value of a sample set (k = 1).
inline double mean_cv(const CvMap& m, const Dataset& samples) {
  if (samples.empty()) throw ConfigError("mean_cv: empty sample set");
  if (cv_dim(m) != 1) throw ShapeError("mean_cv: scalar CV expected");
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) sum += cv_value(m, samples.row(i))[0];
  return sum / static_cast<double>(samples.size());
}

//! Predicate "coordinate value >= threshold" used by proportion().
struct CoordinateThreshold {
  std::size_t coordinate = 0;
  double threshold = 0.0;
};

inline double proportion(const Dataset& samples, const CoordinateThreshold& pred) {
  if (samples.empty()) throw ConfigError("proportion: empty sample set");
  if (pred.coordinate >= samples.dim) throw ShapeError("proportion: coordinate out of range");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples.row(i)[pred.coordinate] >= pred.threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

//! Normalized 1D histogram; mass sums to one over the bins.
struct Density1D {
  Vector bin_edges;
  Vector mass;

  std::size_t n_bins() const { return mass.size(); }
  double bin_center(std::size_t i) const { return 0.5 * (bin_edges[i] + bin_edges[i + 1]); }
};

inline Vector uniform_bin_edges(double lo, double hi, std::size_t n_bins) {
  if (!(hi > lo) || n_bins == 0) throw ConfigError("uniform_bin_edges: bad range or bin count");
  Vector edges(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
  }
  return edges;
}

//! Uniform edges over the empirical range of values, padded on both sides by
//! pad_fraction of the span (the 5% margin convention).
inline Vector padded_bin_edges(std::span<const double> values, std::size_t n_bins,
                               double pad_fraction = 0.05) {
  if (values.empty()) throw ConfigError("padded_bin_edges: empty values");
  auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn;
  double hi = *mx;
  double span = hi - lo;
  if (span <= 0.0) span = std::max(1.0, std::abs(lo));
  lo -= pad_fraction * span;
  hi += pad_fraction * span;
  return uniform_bin_edges(lo, hi, n_bins);
}

//! Weighted histogram normalized to total mass one. Bins are half-open
//! [e_i, e_{i+1}) with the last bin closed; values outside the edges carry
//! no mass. Pass an empty weight span for the unweighted histogram.
inline Density1D density_1d(std::span<const double> values, std::span<const double> weights,
                            const Vector& bin_edges) {
  if (values.empty()) throw ConfigError("density_1d: empty values");
  if (!weights.empty() && weights.size() != values.size()) {
    throw ShapeError("density_1d: weights length mismatch");
  }
  if (bin_edges.size() < 2) throw ConfigError("density_1d: need at least one bin");
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
    if (!(bin_edges[i] < bin_edges[i + 1])) {
      throw ConfigError("density_1d: bin edges must be strictly increasing");
    }
  }
  Density1D out;
  out.bin_edges = bin_edges;
  out.mass.assign(bin_edges.size() - 1, 0.0);
  const double lo = bin_edges.front();
  const double hi = bin_edges.back();
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("density_1d: weights must be positive");
    const double v = values[i];
    if (v < lo || v > hi) continue;
    const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
    std::size_t idx = static_cast<std::size_t>(it - bin_edges.begin());
    idx = idx == 0 ? 0 : idx - 1;
    if (idx >= out.mass.size()) idx = out.mass.size() - 1;  // right edge of last bin
    out.mass[idx] += w;
    total += w;
  }
  if (!(total > 0.0)) throw DensityError("density_1d: no mass inside the bins");
  for (double& v : out.mass) v /= total;
  return out;
}

//! Total-variation and first-Wasserstein distance (on bin centers) between
//! two densities over identical bins.
struct DensityDistance {
  double total_variation = 0.0;
  double wasserstein1 = 0.0;
};

inline DensityDistance density_distance(const Density1D& a, const Density1D& b) {
  if (a.bin_edges != b.bin_edges) throw ShapeError("density_distance: bin edges differ");
  DensityDistance d;
  double cum = 0.0;
  for (std::size_t i = 0; i < a.mass.size(); ++i) {
    d.total_variation += 0.5 * std::abs(a.mass[i] - b.mass[i]);
    cum += a.mass[i] - b.mass[i];
    if (i + 1 < a.mass.size()) {
      d.wasserstein1 += std::abs(cum) * (a.bin_center(i + 1) - a.bin_center(i));
    }
  }
  return d;
}

//! Histogram of the scalar CV over a dataset.
inline Density1D cv_density(const Dataset& data, const CvMap& m, const Vector& bin_edges) {
  if (data.empty()) throw ConfigError("cv_density: empty dataset");
  if (cv_dim(m) != 1) throw ShapeError("cv_density: scalar CV expected");
  Vector values(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) values[i] = cv_value(m, data.row(i))[0];
  return density_1d(values, {}, bin_edges);
}

//! Deviation (and mean CV) of generated samples across a grid of targets.
struct DeviationCurve {
  Vector z_values;
  Vector deviation;
  Vector mean_cv;
  std::size_t n_samples = 0;
};

struct DeviationCurveConfig {
  std::size_t n_samples = 1000;
  std::size_t n_time_steps = 100;
  std::uint64_t seed = 0;
  bool with_projection = false;
  ProjectionConfig projection;
};

//! Generic per-target deviation evaluation: generates n_samples per target
//! with a per-target seed derived from the master seed, optionally applies
//! the level-set projection (keeping the terminal point either way), and
//! records deviation and mean CV. The k = 1 grid version below is the curve
//! of the experiments; for k > 1 targets this yields per-bin heatmap data.
inline DeviationCurve deviation_over_targets(const FlowModel& model, const CvMap& m,
                                             const std::vector<Vector>& targets,
                                             const DeviationCurveConfig& cfg) {
  if (targets.empty()) throw ConfigError("deviation_over_targets: no targets");
  DeviationCurve curve;
  curve.n_samples = cfg.n_samples;
  curve.z_values.reserve(targets.size());
  curve.deviation.reserve(targets.size());
  curve.mean_cv.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Vector& z = targets[i];
    Dataset gen = generate(model, z, cfg.n_samples, cfg.n_time_steps,
                           Rng::derive_seed(cfg.seed, i));
    if (cfg.with_projection) {
      for (std::size_t r = 0; r < gen.size(); ++r) {
        const ProjectionResult pr = try_project_to_levelset(m, z, gen.row(r), cfg.projection);
        std::copy(pr.point.begin(), pr.point.end(), gen.row(r).begin());
      }
    }
    curve.z_values.push_back(z.size() == 1 ? z[0] : static_cast<double>(i));
    curve.deviation.push_back(deviation(m, gen, z));
    curve.mean_cv.push_back(cv_dim(m) == 1 ? mean_cv(m, gen) : 0.0);
  }
  return curve;
}

inline DeviationCurve deviation_curve(const FlowModel& model, const CvMap& m,
                                      const Vector& z_grid, const DeviationCurveConfig& cfg) {
  std::vector<Vector> targets;
  targets.reserve(z_grid.size());
  for (double z : z_grid) targets.push_back(Vector{z});
  return deviation_over_targets(model, m, targets, cfg);
}

//! Uniform z-grid over the dataset's visited CV range extended by the given
//! margin on both sides (k = 1).
inline Vector extended_z_grid(const Dataset& data, const CvMap& m, std::size_t n_points,
                              double margin = 0.05) {
  if (data.empty()) throw ConfigError("extended_z_grid: empty dataset");
  if (n_points < 2) throw ConfigError("extended_z_grid: need at least two grid points");
  if (cv_dim(m) != 1) throw ShapeError("extended_z_grid: scalar CV expected");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = cv_value(m, data.row(i))[0];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  lo -= margin * span;
  hi += margin * span;
  Vector grid(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
  }
  return grid;
}

}  // namespace levelflow
