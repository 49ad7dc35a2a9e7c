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

// AVX2+FMA variants of the kernel table. Compiled with per-function target
// attributes so the rest of the library keeps the default baseline; the
// dispatcher only hands these out after a cpuid check.

#include "trajprop/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace trajprop::kernels
{
namespace
{

#define TRAJPROP_AVX2 __attribute__((target("avx2,fma")))

TRAJPROP_AVX2 inline double hsum(__m256d v)
{
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  const __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

TRAJPROP_AVX2 void cubic_eval_avx2(
  const double * cx, const double * cy, const double * u, std::size_t n, double * out_x,
  double * out_y)
{
  const __m256d cx0 = _mm256_set1_pd(cx[0]), cx1 = _mm256_set1_pd(cx[1]);
  const __m256d cx2 = _mm256_set1_pd(cx[2]), cx3 = _mm256_set1_pd(cx[3]);
  const __m256d cy0 = _mm256_set1_pd(cy[0]), cy1 = _mm256_set1_pd(cy[1]);
  const __m256d cy2 = _mm256_set1_pd(cy[2]), cy3 = _mm256_set1_pd(cy[3]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ui = _mm256_loadu_pd(u + i);
    __m256d vx = _mm256_fmadd_pd(cx3, ui, cx2);
    vx = _mm256_fmadd_pd(vx, ui, cx1);
    vx = _mm256_fmadd_pd(vx, ui, cx0);
    __m256d vy = _mm256_fmadd_pd(cy3, ui, cy2);
    vy = _mm256_fmadd_pd(vy, ui, cy1);
    vy = _mm256_fmadd_pd(vy, ui, cy0);
    _mm256_storeu_pd(out_x + i, vx);
    _mm256_storeu_pd(out_y + i, vy);
  }
  for (; i < n; ++i) {
    const double ui = u[i];
    out_x[i] = ((cx[3] * ui + cx[2]) * ui + cx[1]) * ui + cx[0];
    out_y[i] = ((cy[3] * ui + cy[2]) * ui + cy[1]) * ui + cy[0];
  }
}

TRAJPROP_AVX2 double mean_point_distance_avx2(
  const double * a_xy, const double * b_xy, std::size_t n)
{
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = _mm256_loadu_pd(a_xy + 2 * i);      // x0 y0 x1 y1
    const __m256d a1 = _mm256_loadu_pd(a_xy + 2 * i + 4);  // x2 y2 x3 y3
    const __m256d b0 = _mm256_loadu_pd(b_xy + 2 * i);
    const __m256d b1 = _mm256_loadu_pd(b_xy + 2 * i + 4);
    const __m256d d0 = _mm256_sub_pd(a0, b0);
    const __m256d d1 = _mm256_sub_pd(a1, b1);
    const __m256d s0 = _mm256_mul_pd(d0, d0);
    const __m256d s1 = _mm256_mul_pd(d1, d1);
    // hadd pairs within 128-bit lanes: (p0, p2, p1, p3), order is irrelevant
    // for the accumulated sum.
    const __m256d sq = _mm256_hadd_pd(s0, s1);
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(sq));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) {
    const double dx = a_xy[2 * i] - b_xy[2 * i];
    const double dy = a_xy[2 * i + 1] - b_xy[2 * i + 1];
    sum += std::sqrt(dx * dx + dy * dy);
  }
  return sum / static_cast<double>(n);
}

TRAJPROP_AVX2 void affine_forward_avx2(
  const double * w, const double * b, const double * x, std::size_t rows, std::size_t cols,
  double * out)
{
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = w + r * cols;
    __m256d acc = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc);
    }
    double dot = hsum(acc);
    for (; c < cols; ++c) {
      dot += row[c] * x[c];
    }
    out[r] = dot + b[r];
  }
}

TRAJPROP_AVX2 void matvec_transposed_avx2(
  const double * w, const double * g, std::size_t rows, std::size_t cols, double * out)
{
  for (std::size_t c = 0; c < cols; ++c) {
    out[c] = 0.0;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = w + r * cols;
    const __m256d gr = _mm256_set1_pd(g[r]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d cur = _mm256_loadu_pd(out + c);
      _mm256_storeu_pd(out + c, _mm256_fmadd_pd(gr, _mm256_loadu_pd(row + c), cur));
    }
    for (; c < cols; ++c) {
      out[c] += g[r] * row[c];
    }
  }
}

TRAJPROP_AVX2 void rank_one_update_avx2(
  double * w, const double * g, const double * x, std::size_t rows, std::size_t cols)
{
  for (std::size_t r = 0; r < rows; ++r) {
    double * row = w + r * cols;
    const __m256d gr = _mm256_set1_pd(g[r]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d cur = _mm256_loadu_pd(row + c);
      _mm256_storeu_pd(row + c, _mm256_fmadd_pd(gr, _mm256_loadu_pd(x + c), cur));
    }
    for (; c < cols; ++c) {
      row[c] += g[r] * x[c];
    }
  }
}

TRAJPROP_AVX2 void adam_update_avx2(
  double * param, double * m, double * v, const double * grad, std::size_t n, double lr,
  double beta1, double beta2, double eps, double bc1, double bc2)
{
  const __m256d vb1 = _mm256_set1_pd(beta1), vnb1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2), vnb2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
  const __m256d vbc1 = _mm256_set1_pd(bc1), vbc2 = _mm256_set1_pd(bc2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_fmadd_pd(vb1, _mm256_loadu_pd(m + i), _mm256_mul_pd(vnb1, gi));
    const __m256d vi =
      _mm256_fmadd_pd(vb2, _mm256_loadu_pd(v + i), _mm256_mul_pd(vnb2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, vbc1);
    const __m256d v_hat = _mm256_div_pd(vi, vbc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), veps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, m_hat), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

#undef TRAJPROP_AVX2

}  // namespace

bool avx2_available()
{
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Ops & avx2_ops()
{
  static const Ops ops = {
    "avx2",
    cubic_eval_avx2,
    mean_point_distance_avx2,
    affine_forward_avx2,
    matvec_transposed_avx2,
    rank_one_update_avx2,
    adam_update_avx2,
  };
  return ops;
}

}  // namespace trajprop::kernels

#else  // non-x86: no vector variant, the dispatcher falls back to scalar.

namespace trajprop::kernels
{

bool avx2_available() { return false; }

const Ops & avx2_ops() { return scalar_ops(); }

}  // namespace trajprop::kernels

#endif
