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

#include <string>
#include <vector>

#include "fidcal/imaging/image.hpp"

namespace fidcal::imaging {

/// Decodes an image file into a CHW float tensor scaled to [0, 1].
/// Channel order is RGB. The channel count of the file is preserved
/// (grayscale decodes to 1 channel); alpha channels are dropped.
Image decode_image(const std::string& path);

/// Encodes a 1- or 3-channel CHW float image (values clamped to [0, 1])
/// as an 8-bit PNG.
void encode_png(const std::string& path, const Image& img);

/// True if the file extension is one the decoder accepts.
bool is_image_file(const std::string& path);

}  // namespace fidcal::imaging
