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

#ifndef TRAJPROP_RNG_HPP_
#define TRAJPROP_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace trajprop
{

// Seeded RNG with hand-rolled distributions. std::mt19937_64 has a
// standard-specified output sequence, but std::uniform_*_distribution does
// not, so reproducible artifacts (checkpoints, synthetic datasets) must not
// go through the stdlib distributions.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform()
  {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be > 0. Multiply-shift bounded draw.
  std::uint64_t below(std::uint64_t n)
  {
    const unsigned __int128 product =
      static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(product >> 64);
  }

  /// Standard normal via Box-Muller (always consumes two draws).
  double normal()
  {
    const double u1 = 1.0 - uniform();  // avoid log(0)
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool coin(double p_true) { return uniform() < p_true; }

private:
  std::mt19937_64 engine_;
};

}  // namespace trajprop

#endif  // TRAJPROP_RNG_HPP_
