#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "levelflow/cv_map.hpp"
#include "levelflow/dataset.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/langevin.hpp"
#include "levelflow/mean_force.hpp"
#include "levelflow/potentials.hpp"
#include "levelflow/rng.hpp"

namespace levelflow {

struct AbfResult {
  Dataset data;
  MeanForceGrid grid;
  std::size_t out_of_grid_steps = 0;
};

//! Adaptive-biasing-force Langevin sampler. At every step the running mean
//! force of the cell containing xi(x_t) is updated with the pointwise
//! mean-force integrand; once a cell has reached the activation threshold,
//! the biasing drift grad xi(x_t) * f(xi(x_t)) with f the current cell mean
//! is added on top of -grad V. Out-of-range CV values update the clamped
//! edge cell but receive no bias. States are recorded after
//! equilibration_steps, every record_every steps.
//!
//! The RNG is consumed exactly as in sample_langevin (d normal draws per
//! step in coordinate order), so a never-activating grid reproduces the
//! unbiased trajectory of the same seed.
inline AbfResult sample_abf(const Potential& p, const CvMap& m, const LangevinConfig& cfg,
                            const MeanForceGridSpec& grid_spec, std::size_t equilibration_steps,
                            double mean_force_fd_step = 1.0e-5) {
  cfg.validate();
  grid_spec.validate();
  if (cv_dim(m) != 1) throw ConfigError("sample_abf: only k = 1 CVs are supported");
  if (equilibration_steps >= cfg.n_steps) {
    throw ConfigError("sample_abf: equilibration_steps must be below n_steps");
  }

  const std::size_t d = cfg.initial_point.size();
  Rng rng(cfg.seed);
  Vector x = cfg.initial_point;
  Vector drift(d);
  const double noise_scale = cfg.noise_free ? 0.0 : std::sqrt(2.0 * cfg.step_size / cfg.beta);

  AbfResult res;
  res.grid = MeanForceGrid(grid_spec);
  Dataset& out = res.data;
  out.dim = d;
  out.reserve((cfg.n_steps - equilibration_steps) / cfg.record_every);
  out.meta.source = "abf";
  out.meta.potential = potential_id(p);
  out.meta.cv = cv_id(m);
  out.meta.seed = cfg.seed;

  for (std::size_t step = 0; step < cfg.n_steps; ++step) {
    const double z = cv_value(m, x)[0];
    const bool inside = res.grid.inside(z);
    if (!inside) res.out_of_grid_steps += 1;
    const std::size_t cell = res.grid.clamped_index(z);
    res.grid.update(cell, local_mean_force(p, m, x, cfg.beta, mean_force_fd_step)[0]);

    potential_gradient(p, x, drift);
    for (double& g : drift) g = -g;
    if (inside && res.grid.active(cell)) {
      const Matrix jac = cv_jacobian(m, x);
      const double f = res.grid.mean_force(cell);
      for (std::size_t i = 0; i < d; ++i) drift[i] += jac(i, 0) * f;
    }

    for (std::size_t i = 0; i < d; ++i) {
      x[i] += cfg.step_size * drift[i];
      if (!cfg.noise_free) x[i] += noise_scale * rng.normal();
    }
    detail::check_state_finite(x, step);

    if (step >= equilibration_steps && (step + 1 - equilibration_steps) % cfg.record_every == 0) {
      out.push_back(x);
    }
  }
  if (res.out_of_grid_steps > 0) {
    std::fprintf(stderr, "warning: abf: CV left the grid range on %zu of %zu steps\n",
                 res.out_of_grid_steps, cfg.n_steps);
  }
  return res;
}

}  // namespace levelflow
