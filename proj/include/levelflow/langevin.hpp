#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "levelflow/dataset.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/potentials.hpp"
#include "levelflow/rng.hpp"

namespace levelflow {

//! Euler-Maruyama configuration for overdamped Langevin sampling.
struct LangevinConfig {
  double step_size = 1.0e-3;
  double beta = 1.0;
  std::size_t n_steps = 0;
  std::size_t record_every = 1;
  std::uint64_t seed = 0;
  Point initial_point;
  //! Treat the noise amplitude sqrt(2/beta) as zero; deterministic runs for
  //! unit tests. The RNG is not consumed in this mode.
  bool noise_free = false;

  void validate() const {
    if (!(step_size > 0.0)) throw ConfigError("LangevinConfig: step_size must be > 0");
    if (!(beta > 0.0)) throw ConfigError("LangevinConfig: beta must be > 0");
    if (n_steps == 0) throw ConfigError("LangevinConfig: n_steps must be positive");
    if (record_every == 0) throw ConfigError("LangevinConfig: record_every must be positive");
    if (initial_point.empty()) throw ConfigError("LangevinConfig: initial_point not set");
  }
};

namespace detail {

inline void check_state_finite(const Vector& x, std::size_t step) {
  if (!all_finite(x)) {
    throw NumericalError("trajectory diverged: non-finite state at step " + std::to_string(step));
  }
}

}  // namespace detail

//! Unbiased overdamped Langevin trajectory
//!   x_{n+1} = x_n - grad V(x_n) h + sqrt(2 h / beta) z_n,   z_n ~ N(0, I_d),
//! recording every record_every-th state. Deterministic given the seed.
inline Dataset sample_langevin(const Potential& p, const LangevinConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.initial_point.size();
  Rng rng(cfg.seed);
  Vector x = cfg.initial_point;
  Vector grad(d);
  const double noise_scale = cfg.noise_free ? 0.0 : std::sqrt(2.0 * cfg.step_size / cfg.beta);

  Dataset out(d);
  out.reserve(cfg.n_steps / cfg.record_every);
  out.meta.source = "langevin";
  out.meta.potential = potential_id(p);
  out.meta.seed = cfg.seed;

  for (std::size_t step = 0; step < cfg.n_steps; ++step) {
    potential_gradient(p, x, grad);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] -= cfg.step_size * grad[i];
      if (!cfg.noise_free) x[i] += noise_scale * rng.normal();
    }
    detail::check_state_finite(x, step);
    if ((step + 1) % cfg.record_every == 0) out.push_back(x);
  }
  return out;
}

}  // namespace levelflow
