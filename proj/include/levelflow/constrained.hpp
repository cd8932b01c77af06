#pragma once

#include <cmath>
#include <string>

#include "levelflow/cv_map.hpp"
#include "levelflow/dataset.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/langevin.hpp"
#include "levelflow/potentials.hpp"
#include "levelflow/projection.hpp"
#include "levelflow/rng.hpp"

namespace levelflow {

namespace detail {

//! det(J^T J)^{-1/2} at x; the co-area weight attached to constrained
//! samples. Reduces to 1/|grad xi| for scalar CVs.
inline double coarea_weight(const CvMap& m, std::span<const double> x) {
  const Matrix j = cv_jacobian(m, x);
  const std::size_t k = j.cols;
  if (k == 1) {
    const double n = norm2(j.data.data(), j.data.size());
    if (n == 0.0) throw RankError("coarea_weight: zero CV gradient");
    return 1.0 / n;
  }
  if (k == 2) {
    double g00 = 0.0, g01 = 0.0, g11 = 0.0;
    for (std::size_t l = 0; l < j.rows; ++l) {
      g00 += j(l, 0) * j(l, 0);
      g01 += j(l, 0) * j(l, 1);
      g11 += j(l, 1) * j(l, 1);
    }
    const double det = g00 * g11 - g01 * g01;
    if (!(det > 0.0)) throw RankError("coarea_weight: singular Gram matrix");
    return 1.0 / std::sqrt(det);
  }
  throw ConfigError("coarea_weight: k > 2 not supported");
}

}  // namespace detail

//! Level-set sampler: one Euler-Maruyama step of the unconstrained dynamics
//! followed by gradient-flow projection back to Sigma_z at tolerance tol.
//! A step whose projection fails is rejected and retried with a halved step
//! size (fresh noise draw), up to 10 halvings. Every recorded state carries
//! the co-area weight det(grad xi^T grad xi)^{-1/2}, i.e. |grad xi|^{-1} for
//! k = 1, so that weighted averages follow the conditional distribution.
//!
//! The starting point is cfg.initial_point projected onto Sigma_z; the
//! projection sub-integrator uses proj's step budget with its tolerance
//! overridden by tol.
inline WeightedDataset sample_constrained(const Potential& p, const CvMap& m, const Vector& z,
                                          const LangevinConfig& cfg, double tol,
                                          ProjectionConfig proj = {}) {
  cfg.validate();
  if (!(tol > 0.0)) throw ConfigError("sample_constrained: tol must be positive");
  proj.tolerance = tol;
  proj.validate();

  const std::size_t d = cfg.initial_point.size();
  Rng rng(cfg.seed);
  Vector grad(d);
  Vector proposal(d);

  Point x = project_to_levelset(m, z, cfg.initial_point, proj).first;

  WeightedDataset out;
  out.points.dim = d;
  out.points.reserve(cfg.n_steps / cfg.record_every);
  out.weights.reserve(cfg.n_steps / cfg.record_every);
  out.points.meta.source = "constrained";
  out.points.meta.potential = potential_id(p);
  out.points.meta.cv = cv_id(m);
  out.points.meta.seed = cfg.seed;

  constexpr std::size_t max_retries = 10;
  for (std::size_t step = 0; step < cfg.n_steps; ++step) {
    potential_gradient(p, x, grad);
    double h = cfg.step_size;
    bool accepted = false;
    for (std::size_t attempt = 0; attempt <= max_retries; ++attempt) {
      const double noise_scale = cfg.noise_free ? 0.0 : std::sqrt(2.0 * h / cfg.beta);
      for (std::size_t i = 0; i < d; ++i) {
        proposal[i] = x[i] - h * grad[i];
        if (!cfg.noise_free) proposal[i] += noise_scale * rng.normal();
      }
      const ProjectionResult pr = try_project_to_levelset(m, z, proposal, proj);
      if (pr.converged) {
        x = pr.point;
        accepted = true;
        break;
      }
      h *= 0.5;
    }
    if (!accepted) {
      throw ConvergenceError(
          "sample_constrained: projection failed after 10 step halvings at step " +
              std::to_string(step),
          tol, step);
    }
    detail::check_state_finite(x, step);
    if ((step + 1) % cfg.record_every == 0) {
      out.points.push_back(x);
      out.weights.push_back(detail::coarea_weight(m, x));
    }
  }
  return out;
}

}  // namespace levelflow
