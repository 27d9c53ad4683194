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

namespace fidcal::exp::internal {

struct PlotSeries {
  std::string label;
  std::vector<double> ys;  // x is the 0-based index
};

/// Rasterizes index-vs-value polylines onto a white canvas with axes, tick
/// labels, and a color legend. Text uses a built-in 5x7 bitmap font
/// (lowercase letters, digits, and basic punctuation).
imaging::Image render_line_plot(const std::vector<PlotSeries>& series, int width = 800,
                                int height = 480);

/// Draws a text string into the image at (y, x) top-left, in the given
/// color. Unknown characters render as blanks.
void draw_text(imaging::Image& img, int y, int x, const std::string& text, const float rgb[3]);

}  // namespace fidcal::exp::internal
