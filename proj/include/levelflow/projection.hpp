#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levelflow/cv_map.hpp"
#include "levelflow/dataset.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/linalg.hpp"

namespace levelflow {

struct ProjectionConfig {
  double step_size = 0.01;
  std::size_t max_steps = 7000;
  double tolerance = 1.0e-3;

  void validate() const {
    if (!(step_size > 0.0) || !std::isfinite(step_size)) {
      throw ConfigError("ProjectionConfig: step_size must be positive and finite");
    }
    if (max_steps == 0) throw ConfigError("ProjectionConfig: max_steps must be positive");
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
      throw ConfigError("ProjectionConfig: tolerance must be positive and finite");
    }
  }
};

struct ProjectionResult {
  Point point;
  std::size_t steps_used = 0;
  double residual = 0.0;  // ||xi(Y) - z|| at the terminal point
  bool converged = false;
  std::size_t halvings = 0;
};

//! Explicit-Euler integration of the level-set gradient flow
//!   dY/dt = -grad G(Y),  G(y) = 0.5 ||xi(y) - z||^2,
//! until ||xi(Y) - z|| < tolerance or max_steps is exhausted. G is
//! non-increasing along accepted steps; a step that increases it is retried
//! with a halved step size (kept for the rest of the trajectory), up to 20
//! halvings. Does not throw on non-convergence; see project_to_levelset.
//! When g_trace is given, G is appended after every accepted step.
inline ProjectionResult try_project_to_levelset(const CvMap& m, const Vector& z,
                                                std::span<const double> x,
                                                const ProjectionConfig& cfg,
                                                std::vector<double>* g_trace = nullptr) {
  cfg.validate();
  if (z.size() != cv_dim(m)) throw ShapeError("project_to_levelset: z dimension mismatch");
  const std::size_t d = x.size();
  const std::size_t k = z.size();

  ProjectionResult res;
  res.point.assign(x.begin(), x.end());

  Vector r = cv_value(m, res.point);
  for (std::size_t j = 0; j < k; ++j) r[j] -= z[j];
  double g = 0.5 * dot(r.data(), r.data(), k);
  res.residual = std::sqrt(2.0 * g);
  if (res.residual < cfg.tolerance) {
    res.converged = true;
    return res;
  }

  double step = cfg.step_size;
  Vector descent(d);
  Vector candidate(d);
  Vector r_new(k);
  constexpr std::size_t max_halvings_per_step = 20;

  for (std::size_t n = 0; n < cfg.max_steps; ++n) {
    const Matrix jac = cv_jacobian(m, res.point);
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += jac(i, j) * r[j];
      descent[i] = -s;
    }

    std::size_t halvings_here = 0;
    double g_new = 0.0;
    while (true) {
      for (std::size_t i = 0; i < d; ++i) candidate[i] = res.point[i] + step * descent[i];
      r_new = cv_value(m, candidate);
      for (std::size_t j = 0; j < k; ++j) r_new[j] -= z[j];
      g_new = 0.5 * dot(r_new.data(), r_new.data(), k);
      // Strict decrease: accepting G_new == G would allow two-cycles between
      // symmetric points straddling a critical point of G.
      if (std::isfinite(g_new) && g_new < g) break;
      if (++halvings_here > max_halvings_per_step) {
        res.residual = std::sqrt(2.0 * g);
        return res;  // stuck against a degenerate geometry
      }
      step *= 0.5;
      res.halvings += 1;
    }

    res.point = candidate;
    r = r_new;
    g = g_new;
    res.steps_used = n + 1;
    if (g_trace) g_trace->push_back(g);
    res.residual = std::sqrt(2.0 * g);
    if (res.residual < cfg.tolerance) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

//! Throwing variant: returns the projected point and the number of Euler
//! steps used, or raises ConvergenceError carrying the terminal residual.
inline std::pair<Point, std::size_t> project_to_levelset(const CvMap& m, const Vector& z,
                                                         std::span<const double> x,
                                                         const ProjectionConfig& cfg) {
  ProjectionResult res = try_project_to_levelset(m, z, x, cfg);
  if (!res.converged) {
    throw ConvergenceError("project_to_levelset: residual " + std::to_string(res.residual) +
                               " after " + std::to_string(res.steps_used) + " steps",
                           res.residual, res.steps_used);
  }
  return {std::move(res.point), res.steps_used};
}

}  // namespace levelflow
