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

#include <cstdlib>
#include <string_view>

#include "trajprop/kernels.hpp"

namespace trajprop::kernels
{
namespace
{

const Ops & select()
{
  if (const char * env = std::getenv("TRAJPROP_KERNELS")) {
    const std::string_view v(env);
    if (v == "scalar") {
      return scalar_ops();
    }
    if (v == "avx2" && avx2_available()) {
      return avx2_ops();
    }
    // Unknown or unavailable request: fall through to the automatic choice.
  }
  return avx2_available() ? avx2_ops() : scalar_ops();
}

}  // namespace

const Ops & active()
{
  static const Ops & chosen = select();
  return chosen;
}

}  // namespace trajprop::kernels
