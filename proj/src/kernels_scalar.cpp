// Copyright 2026 The trajprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstddef>

#include "trajprop/kernels.hpp"

namespace trajprop::kernels
{
namespace
{

void cubic_eval_scalar(
  const double * cx, const double * cy, const double * u, std::size_t n, double * out_x,
  double * out_y)
{
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = u[i];
    out_x[i] = ((cx[3] * ui + cx[2]) * ui + cx[1]) * ui + cx[0];
    out_y[i] = ((cy[3] * ui + cy[2]) * ui + cy[1]) * ui + cy[0];
  }
}

double mean_point_distance_scalar(const double * a_xy, const double * b_xy, std::size_t n)
{
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = a_xy[2 * i] - b_xy[2 * i];
    const double dy = a_xy[2 * i + 1] - b_xy[2 * i + 1];
    sum += std::sqrt(dx * dx + dy * dy);
  }
  return sum / static_cast<double>(n);
}

void affine_forward_scalar(
  const double * w, const double * b, const double * x, std::size_t rows, std::size_t cols,
  double * out)
{
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = w + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      acc += row[c] * x[c];
    }
    out[r] = acc + b[r];
  }
}

void matvec_transposed_scalar(
  const double * w, const double * g, std::size_t rows, std::size_t cols, double * out)
{
  for (std::size_t c = 0; c < cols; ++c) {
    out[c] = 0.0;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = w + r * cols;
    const double gr = g[r];
    for (std::size_t c = 0; c < cols; ++c) {
      out[c] += gr * row[c];
    }
  }
}

void rank_one_update_scalar(
  double * w, const double * g, const double * x, std::size_t rows, std::size_t cols)
{
  for (std::size_t r = 0; r < rows; ++r) {
    double * row = w + r * cols;
    const double gr = g[r];
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] += gr * x[c];
    }
  }
}

void adam_update_scalar(
  double * param, double * m, double * v, const double * grad, std::size_t n, double lr,
  double beta1, double beta2, double eps, double bc1, double bc2)
{
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

const Ops & scalar_ops()
{
  static const Ops ops = {
    "scalar",
    cubic_eval_scalar,
    mean_point_distance_scalar,
    affine_forward_scalar,
    matvec_transposed_scalar,
    rank_one_update_scalar,
    adam_update_scalar,
  };
  return ops;
}

}  // namespace trajprop::kernels
