#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "levelflow/errors.hpp"
#include "levelflow/linalg.hpp"

namespace levelflow {

//! A state in R^d.
using Point = std::vector<double>;

//! Provenance carried alongside sampled data and stored in the .meta sidecar.
struct DatasetMeta {
  std::string source;       // e.g. "circles", "langevin", "abf", "constrained", "generated"
  std::string potential;    // potential id, empty when not applicable
  std::string cv;           // CV map id, empty when not applicable
  std::uint64_t seed = 0;
  std::string config_json;  // snapshot of the generating configuration
};

//! Ordered collection of points, stored row-major.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> values;
  DatasetMeta meta;

  Dataset() = default;
  explicit Dataset(std::size_t d) : dim(d) {}

  std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  bool empty() const { return values.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }

  void push_back(std::span<const double> p) {
    if (p.size() != dim) throw ShapeError("Dataset::push_back: wrong point dimension");
    values.insert(values.end(), p.begin(), p.end());
  }

  Point point(std::size_t i) const {
    const auto r = row(i);
    return Point(r.begin(), r.end());
  }

  void reserve(std::size_t n) { values.reserve(n * dim); }
};

//! Dataset plus one positive importance weight per point. Weights are kept
//! unnormalized; consumers normalize where needed.
struct WeightedDataset {
  Dataset points;
  Vector weights;
};

}  // namespace levelflow
