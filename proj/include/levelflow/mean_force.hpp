#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>

#include "levelflow/cv_map.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/linalg.hpp"
#include "levelflow/potentials.hpp"

namespace levelflow {

namespace detail {

//! W(x) = (J^T J)^{-1} J^T, shape (k x d), with J = grad xi(x).
inline Matrix pseudo_inverse_jacobian(const CvMap& m, std::span<const double> x) {
  const Matrix j = cv_jacobian(m, x);
  const std::size_t d = j.rows;
  const std::size_t k = j.cols;
  Matrix gram(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      double s = 0.0;
      for (std::size_t l = 0; l < d; ++l) s += j(l, a) * j(l, b);
      gram(a, b) = s;
    }
  }
  Matrix w(k, d);
  Vector rhs(k);
  for (std::size_t l = 0; l < d; ++l) {
    for (std::size_t a = 0; a < k; ++a) rhs[a] = j(l, a);
    const Vector col = solve_small(gram, rhs);
    for (std::size_t a = 0; a < k; ++a) w(a, l) = col[a];
  }
  return w;
}

}  // namespace detail

//! Pointwise integrand of the mean-force expression:
//!   (J^T J)^{-1} J^T grad V - beta^{-1} div[(J^T J)^{-1} J^T],
//! where the divergence of each row of W = (J^T J)^{-1} J^T is taken over x
//! and discretized by central finite differences of step fd_step.
inline Vector local_mean_force(const Potential& p, const CvMap& m, std::span<const double> x,
                               double beta, double fd_step = 1.0e-5) {
  const std::size_t d = x.size();
  const Matrix w = detail::pseudo_inverse_jacobian(m, x);
  const std::size_t k = w.rows;
  const Vector grad_v = potential_gradient(p, x);

  Vector force(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) force[i] = dot(w.row(i), grad_v.data(), d);

  Vector shifted(x.begin(), x.end());
  for (std::size_t l = 0; l < d; ++l) {
    shifted[l] = x[l] + fd_step;
    const Matrix w_plus = detail::pseudo_inverse_jacobian(m, shifted);
    shifted[l] = x[l] - fd_step;
    const Matrix w_minus = detail::pseudo_inverse_jacobian(m, shifted);
    shifted[l] = x[l];
    for (std::size_t i = 0; i < k; ++i) {
      force[i] -= (w_plus(i, l) - w_minus(i, l)) / (2.0 * fd_step * beta);
    }
  }
  return force;
}

//! Closed form for the radial CV xi = |x|^2 in two dimensions, where the
//! divergence term vanishes identically; cross-checks the finite-difference
//! path in tests.
inline double local_mean_force_radial_analytic(const Potential& p, std::span<const double> x) {
  const double r2 = dot(x.data(), x.data(), x.size());
  if (r2 == 0.0) throw RankError("local_mean_force_radial_analytic: zero gradient at origin");
  const Vector grad_v = potential_gradient(p, x);
  return dot(x.data(), grad_v.data(), x.size()) / (2.0 * r2);
}

//! Uniform grid over CV space holding per-cell running mean-force estimates.
//! Only one-dimensional CVs are exercised; the force entries keep their
//! vector shape so the layout extends to k > 1.
struct MeanForceGridSpec {
  Vector lo;
  Vector hi;
  std::size_t n_cells = 0;
  std::size_t activation_threshold = 100;

  void validate() const {
    if (lo.size() != 1 || hi.size() != 1) {
      throw ConfigError("MeanForceGridSpec: only k = 1 grids are supported");
    }
    if (!(lo[0] < hi[0])) throw ConfigError("MeanForceGridSpec: lo must be below hi");
    if (n_cells == 0) throw ConfigError("MeanForceGridSpec: n_cells must be positive");
    if (activation_threshold == 0) {
      throw ConfigError("MeanForceGridSpec: activation_threshold must be >= 1");
    }
  }
};

class MeanForceGrid {
 public:
  MeanForceGrid() = default;
  explicit MeanForceGrid(MeanForceGridSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    counts_.assign(spec_.n_cells, 0);
    force_sums_.assign(spec_.n_cells, 0.0);
  }

  const MeanForceGridSpec& spec() const { return spec_; }
  std::size_t n_cells() const { return spec_.n_cells; }

  bool inside(double z) const { return z >= spec_.lo[0] && z < spec_.hi[0]; }

  //! Cell index of z, clamped to the edge cells outside the range.
  std::size_t clamped_index(double z) const {
    if (z < spec_.lo[0]) return 0;
    const double w = (spec_.hi[0] - spec_.lo[0]) / static_cast<double>(spec_.n_cells);
    const auto idx = static_cast<std::size_t>((z - spec_.lo[0]) / w);
    return idx >= spec_.n_cells ? spec_.n_cells - 1 : idx;
  }

  double cell_center(std::size_t i) const {
    const double w = (spec_.hi[0] - spec_.lo[0]) / static_cast<double>(spec_.n_cells);
    return spec_.lo[0] + (static_cast<double>(i) + 0.5) * w;
  }

  void update(std::size_t cell, double force) {
    counts_[cell] += 1;
    force_sums_[cell] += force;
  }

  std::uint64_t visit_count(std::size_t cell) const { return counts_[cell]; }

  bool active(std::size_t cell) const { return counts_[cell] >= spec_.activation_threshold; }

  double mean_force(std::size_t cell) const {
    return counts_[cell] == 0 ? 0.0 : force_sums_[cell] / static_cast<double>(counts_[cell]);
  }

 private:
  MeanForceGridSpec spec_;
  std::vector<std::uint64_t> counts_;
  Vector force_sums_;
};

}  // namespace levelflow
