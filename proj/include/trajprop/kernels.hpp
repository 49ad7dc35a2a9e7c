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

#ifndef TRAJPROP_KERNELS_HPP_
#define TRAJPROP_KERNELS_HPP_

#include <cstddef>

namespace trajprop::kernels
{

// Data-parallel inner loops of the library. Every kernel exists as a scalar
// reference implementation and, on x86-64 hardware with AVX2+FMA, as a
// vectorized variant. The active table is selected once at startup; the
// TRAJPROP_KERNELS environment variable ("scalar" or "avx2") overrides the
// automatic choice. Scalar and vector variants may associate sums
// differently, so results agree to rounding error, not bitwise; within one
// process the selected table never changes, which keeps runs reproducible.
struct Ops
{
  const char * name;

  /// out_x[i] = cx[0] + cx[1]*u[i] + cx[2]*u[i]^2 + cx[3]*u[i]^3 (same for y).
  void (*cubic_eval)(
    const double * cx, const double * cy, const double * u, std::size_t n, double * out_x,
    double * out_y);

  /// Mean Euclidean distance between paired points. a_xy/b_xy are interleaved
  /// x0,y0,x1,y1,... arrays of n points each.
  double (*mean_point_distance)(const double * a_xy, const double * b_xy, std::size_t n);

  /// out = W * x + b with W row-major (rows x cols).
  void (*affine_forward)(
    const double * w, const double * b, const double * x, std::size_t rows, std::size_t cols,
    double * out);

  /// out = W^T * g with W row-major (rows x cols); g has rows entries,
  /// out has cols entries.
  void (*matvec_transposed)(
    const double * w, const double * g, std::size_t rows, std::size_t cols, double * out);

  /// W += g * x^T (rank-one update of a row-major rows x cols matrix).
  void (*rank_one_update)(
    double * w, const double * g, const double * x, std::size_t rows, std::size_t cols);

  /// One Adam step over n parameters. bc1 = 1 - beta1^t, bc2 = 1 - beta2^t.
  void (*adam_update)(
    double * param, double * m, double * v, const double * grad, std::size_t n, double lr,
    double beta1, double beta2, double eps, double bc1, double bc2);
};

const Ops & scalar_ops();

/// True when the running CPU supports the AVX2+FMA variants.
bool avx2_available();

/// AVX2 table; only valid to call when avx2_available() is true.
const Ops & avx2_ops();

/// The table selected for this process (never changes once chosen).
const Ops & active();

}  // namespace trajprop::kernels

#endif  // TRAJPROP_KERNELS_HPP_
