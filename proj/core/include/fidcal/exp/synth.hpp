// Copyright 2026 The fidcal Authors
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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fidcal/imaging/image.hpp"

namespace fidcal::exp {

/// Names of the procedural texture families, in class-id order. The list is
/// cycled when more classes are requested than families exist.
const std::vector<std::string>& texture_family_names();

/// Renders one corpus image: a seeded procedural texture whose family is
/// chosen by class id. Geometry (orientation, frequency, phase, anchor
/// points) varies per image; foreground/background colors are drawn from
/// one distribution shared by all classes, with a minimum contrast between
/// them, so texture shape is the only class cue.
imaging::Image synth_image(int class_id, int image_index, int size, std::uint64_t seed);

/// Materializes a directory-per-class corpus of PNG files under root:
/// root/<family_NN>/img_NNNN.png. Deterministic in the seed; existing files
/// are overwritten.
void synth_corpus(const std::string& root, int num_classes, int per_class, int size,
                  std::uint64_t seed);

}  // namespace fidcal::exp
