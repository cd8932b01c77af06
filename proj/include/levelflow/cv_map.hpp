#pragma once

#include <span>
#include <string>
#include <variant>

#include "levelflow/errors.hpp"
#include "levelflow/linalg.hpp"
#include "levelflow/mlp.hpp"

namespace levelflow {

//! xi(x) = sum_i x_i^2, k = 1. The Jacobian column is 2x, which loses rank at
//! the origin (z = 0 is not a regular value there).
struct RadialCv {};

//! Learned CV: a trained encoder network composed with a per-component output
//! affine map value = scale * raw + shift. The affine part records the
//! calibration of the learned CV scale; identity by default.
struct EncoderCv {
  MlpParams net;
  Vector out_scale;
  Vector out_shift;

  static EncoderCv from_net(MlpParams net) {
    EncoderCv e;
    e.out_scale.assign(net.output_dim(), 1.0);
    e.out_shift.assign(net.output_dim(), 0.0);
    e.net = std::move(net);
    return e;
  }
};

using CvMap = std::variant<RadialCv, EncoderCv>;

inline std::string cv_id(const CvMap& m) {
  return std::holds_alternative<RadialCv>(m) ? "radial" : "encoder";
}

//! Number of CV components k.
inline std::size_t cv_dim(const CvMap& m) {
  if (std::holds_alternative<RadialCv>(m)) return 1;
  return std::get<EncoderCv>(m).net.output_dim();
}

inline Vector cv_value(const CvMap& m, std::span<const double> x) {
  if (std::holds_alternative<RadialCv>(m)) {
    return {dot(x.data(), x.data(), x.size())};
  }
  const auto& enc = std::get<EncoderCv>(m);
  if (x.size() != enc.net.input_dim()) throw ShapeError("cv_value: input dim mismatch");
  Vector v = mlp_forward(enc.net, Vector(x.begin(), x.end()));
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = enc.out_scale[j] * v[j] + enc.out_shift[j];
  return v;
}

//! Jacobian of xi at x, shape (d x k).
inline Matrix cv_jacobian(const CvMap& m, std::span<const double> x) {
  if (std::holds_alternative<RadialCv>(m)) {
    Matrix j(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) j(i, 0) = 2.0 * x[i];
    return j;
  }
  const auto& enc = std::get<EncoderCv>(m);
  if (x.size() != enc.net.input_dim()) throw ShapeError("cv_jacobian: input dim mismatch");
  const std::size_t d = x.size();
  const std::size_t k = enc.net.output_dim();
  Matrix j(d, k);
  const Vector input(x.begin(), x.end());
  Vector unit(k, 0.0);
  for (std::size_t col = 0; col < k; ++col) {
    unit.assign(k, 0.0);
    unit[col] = 1.0;
    const auto back = mlp_backward(enc.net, input, unit);
    for (std::size_t row = 0; row < d; ++row) {
      j(row, col) = enc.out_scale[col] * back.input_grad[row];
    }
  }
  return j;
}

}  // namespace levelflow
