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

#ifndef TRAJPROP_SVG_HPP_
#define TRAJPROP_SVG_HPP_

#include <string>

#include "trajprop/predict.hpp"
#include "trajprop/scene.hpp"

namespace trajprop::svg
{

/// Standalone SVG of one scene: areas, reference lines, agent histories, the
/// ground-truth future of the predicted agent, and the ranked predictions,
/// with a legend. Output is a pure function of the inputs (fixed 3-decimal
/// coordinates), so identical inputs give byte-identical markup.
std::string render_svg(const Scene & scene, const predict::PredictionSet & predictions);

/// render_svg written to `path`; throws Error when the file cannot be written.
void emit_svg(const Scene & scene, const predict::PredictionSet & predictions,
  const std::string & path);

}  // namespace trajprop::svg

#endif  // TRAJPROP_SVG_HPP_
