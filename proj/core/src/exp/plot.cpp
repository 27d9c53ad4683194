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

#include "plot.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

namespace fidcal::exp::internal {
namespace {

// 5x7 glyphs, one bit per pixel, row-major from the top. Covers what axis
// labels and legend names need.
const std::map<char, std::array<std::uint8_t, 7>>& font() {
  static const std::map<char, std::array<std::uint8_t, 7>> glyphs = {
      {'0', {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}},
      {'1', {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},
      {'2', {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f}},
      {'3', {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e}},
      {'4', {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02}},
      {'5', {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},
      {'6', {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e}},
      {'7', {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e}},
      {'9', {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c}},
      {'a', {0x00, 0x00, 0x0e, 0x01, 0x0f, 0x11, 0x0f}},
      {'b', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1e}},
      {'c', {0x00, 0x00, 0x0e, 0x10, 0x10, 0x11, 0x0e}},
      {'d', {0x01, 0x01, 0x0d, 0x13, 0x11, 0x11, 0x0f}},
      {'e', {0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e}},
      {'f', {0x06, 0x09, 0x08, 0x1c, 0x08, 0x08, 0x08}},
      {'g', {0x00, 0x0f, 0x11, 0x11, 0x0f, 0x01, 0x0e}},
      {'h', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11}},
      {'i', {0x04, 0x00, 0x0c, 0x04, 0x04, 0x04, 0x0e}},
      {'j', {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0c}},
      {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
      {'l', {0x0c, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e}},
      {'m', {0x00, 0x00, 0x1a, 0x15, 0x15, 0x11, 0x11}},
      {'n', {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11}},
      {'o', {0x00, 0x00, 0x0e, 0x11, 0x11, 0x11, 0x0e}},
      {'p', {0x00, 0x1e, 0x11, 0x11, 0x1e, 0x10, 0x10}},
      {'q', {0x00, 0x0d, 0x13, 0x13, 0x0d, 0x01, 0x01}},
      {'r', {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10}},
      {'s', {0x00, 0x00, 0x0f, 0x10, 0x0e, 0x01, 0x1e}},
      {'t', {0x08, 0x08, 0x1c, 0x08, 0x08, 0x09, 0x06}},
      {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0d}},
      {'v', {0x00, 0x00, 0x11, 0x11, 0x11, 0x0a, 0x04}},
      {'w', {0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0a}},
      {'x', {0x00, 0x00, 0x11, 0x0a, 0x04, 0x0a, 0x11}},
      {'y', {0x00, 0x11, 0x11, 0x0f, 0x01, 0x11, 0x0e}},
      {'z', {0x00, 0x00, 0x1f, 0x02, 0x04, 0x08, 0x1f}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}},
      {'-', {0x00, 0x00, 0x00, 0x0e, 0x00, 0x00, 0x00}},
      {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1f}},
      {'+', {0x00, 0x04, 0x04, 0x1f, 0x04, 0x04, 0x00}},
      {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
  };
  return glyphs;
}

void put_pixel(imaging::Image& img, int y, int x, const float rgb[3]) {
  if (y < 0 || x < 0 || y >= imaging::height(img) || x >= imaging::width(img)) return;
  for (int c = 0; c < 3; ++c) img.at(c, y, x) = rgb[c];
}

void draw_line(imaging::Image& img, int y0, int x0, int y1, int x1, const float rgb[3]) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put_pixel(img, y0, x0, rgb);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

const float kBlack[3] = {0.15f, 0.15f, 0.15f};
const float kGrid[3] = {0.85f, 0.85f, 0.85f};

const float kPalette[8][3] = {
    {0.122f, 0.467f, 0.706f}, {1.000f, 0.498f, 0.055f}, {0.173f, 0.627f, 0.173f},
    {0.839f, 0.153f, 0.157f}, {0.580f, 0.404f, 0.741f}, {0.549f, 0.337f, 0.294f},
    {0.890f, 0.467f, 0.761f}, {0.498f, 0.498f, 0.498f},
};

}  // namespace

void draw_text(imaging::Image& img, int y, int x, const std::string& text, const float rgb[3]) {
  const auto& glyphs = font();
  int cx = x;
  for (char raw : text) {
    const char ch = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    const auto it = glyphs.find(ch);
    if (it != glyphs.end()) {
      for (int gy = 0; gy < 7; ++gy)
        for (int gx = 0; gx < 5; ++gx)
          if (it->second[gy] & (1 << (4 - gx))) put_pixel(img, y + gy, cx + gx, rgb);
    }
    cx += 6;
  }
}

imaging::Image render_line_plot(const std::vector<PlotSeries>& series, int width, int height) {
  FIDCAL_CHECK(!series.empty(), "plot: at least one series required");
  imaging::Image img = imaging::make_image(3, height, width, 1.0f);

  const int ml = 56, mr = 16, mt = 16, mb = 32;
  const int px0 = ml, px1 = width - mr, py0 = mt, py1 = height - mb;

  double lo = 1e300, hi = -1e300;
  std::size_t max_n = 0;
  for (const auto& s : series) {
    max_n = std::max(max_n, s.ys.size());
    for (double v : s.ys) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  FIDCAL_CHECK(max_n >= 1, "plot: series must carry values");
  if (hi <= lo) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const auto to_y = [&](double v) {
    return py1 - static_cast<int>(std::lround((v - lo) / (hi - lo) * (py1 - py0)));
  };
  const auto to_x = [&](double i) {
    const double denom = max_n > 1 ? static_cast<double>(max_n - 1) : 1.0;
    return px0 + static_cast<int>(std::lround(i / denom * (px1 - px0)));
  };

  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const int y = to_y(v);
    draw_line(img, y, px0, y, px1, kGrid);
    draw_text(img, y - 3, 4, format_tick(v), kBlack);
  }
  draw_line(img, py0, px0, py1, px0, kBlack);
  draw_line(img, py1, px0, py1, px1, kBlack);
  draw_text(img, py1 + 8, px0, "0", kBlack);
  const std::string xmax = format_tick(static_cast<double>(max_n ? max_n - 1 : 0));
  draw_text(img, py1 + 8, px1 - static_cast<int>(xmax.size()) * 6, xmax, kBlack);

  for (std::size_t si = 0; si < series.size(); ++si) {
    const float* rgb = kPalette[si % 8];
    const auto& ys = series[si].ys;
    for (std::size_t i = 0; i + 1 < ys.size(); ++i)
      draw_line(img, to_y(ys[i]), to_x(static_cast<double>(i)), to_y(ys[i + 1]),
                to_x(static_cast<double>(i + 1)), rgb);
    const int ly = py0 + 4 + static_cast<int>(si) * 12;
    draw_line(img, ly + 3, px1 - 70, ly + 3, px1 - 58, rgb);
    draw_text(img, ly, px1 - 54, series[si].label, kBlack);
  }
  return img;
}

}  // namespace fidcal::exp::internal
