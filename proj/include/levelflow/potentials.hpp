#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <variant>

#include "levelflow/errors.hpp"
#include "levelflow/linalg.hpp"

namespace levelflow {

//! V(x) = stiffness * |x|^2 / 2 in any dimension.
struct IsotropicQuadratic {
  double stiffness = 1.0;
};

//! Four-Gaussian Mueller-Brown surface on R^2 with the standard published
//! constants: two deep wells separated by a shallow one.
struct MuellerBrown {
  std::array<double, 4> amplitude{-200.0, -100.0, -170.0, 15.0};
  std::array<double, 4> a{-1.0, -1.0, -6.5, 0.7};
  std::array<double, 4> b{0.0, 0.0, 11.0, 0.6};
  std::array<double, 4> c{-10.0, -10.0, -6.5, 0.7};
  std::array<double, 4> x0{1.0, 0.0, -0.5, -1.0};
  std::array<double, 4> y0{0.0, 0.5, 1.5, 1.0};
};

using Potential = std::variant<IsotropicQuadratic, MuellerBrown>;

inline std::string potential_id(const Potential& p) {
  return std::holds_alternative<MuellerBrown>(p) ? "mueller_brown" : "isotropic_quadratic";
}

inline double potential_energy(const Potential& p, std::span<const double> x) {
  if (const auto* q = std::get_if<IsotropicQuadratic>(&p)) {
    return 0.5 * q->stiffness * dot(x.data(), x.data(), x.size());
  }
  const auto& mb = std::get<MuellerBrown>(p);
  if (x.size() != 2) throw ShapeError("potential_energy: MuellerBrown expects d = 2");
  double v = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double dx = x[0] - mb.x0[k];
    const double dy = x[1] - mb.y0[k];
    v += mb.amplitude[k] * std::exp(mb.a[k] * dx * dx + mb.b[k] * dx * dy + mb.c[k] * dy * dy);
  }
  return v;
}

inline void potential_gradient(const Potential& p, std::span<const double> x,
                               std::span<double> out) {
  if (out.size() != x.size()) throw ShapeError("potential_gradient: output size mismatch");
  if (const auto* q = std::get_if<IsotropicQuadratic>(&p)) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = q->stiffness * x[i];
    return;
  }
  const auto& mb = std::get<MuellerBrown>(p);
  if (x.size() != 2) throw ShapeError("potential_gradient: MuellerBrown expects d = 2");
  out[0] = 0.0;
  out[1] = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double dx = x[0] - mb.x0[k];
    const double dy = x[1] - mb.y0[k];
    const double e =
        mb.amplitude[k] * std::exp(mb.a[k] * dx * dx + mb.b[k] * dx * dy + mb.c[k] * dy * dy);
    out[0] += e * (2.0 * mb.a[k] * dx + mb.b[k] * dy);
    out[1] += e * (mb.b[k] * dx + 2.0 * mb.c[k] * dy);
  }
}

inline Vector potential_gradient(const Potential& p, std::span<const double> x) {
  Vector g(x.size());
  potential_gradient(p, x, g);
  return g;
}

}  // namespace levelflow
