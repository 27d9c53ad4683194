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

#include "fidcal/exp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>

#include "fidcal/imaging/codec.hpp"
#include "fidcal/rng.hpp"

namespace fidcal::exp {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct ColorPair {
  float fg[3];
  float bg[3];
};

// Foreground/background colors come from one distribution shared by every
// class, with a minimum channel-summed contrast, so color never identifies
// the class and texture geometry carries all the label information.
ColorPair draw_colors(Rng& rng) {
  ColorPair c{};
  for (int attempt = 0; attempt < 20; ++attempt) {
    double dist = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      c.fg[ch] = static_cast<float>(rng.uniform());
      c.bg[ch] = static_cast<float>(rng.uniform());
      dist += std::abs(c.fg[ch] - c.bg[ch]);
    }
    if (dist >= 0.9) return c;
  }
  for (int ch = 0; ch < 3; ++ch) c.bg[ch] = 1.0f - c.fg[ch];
  return c;
}

double wave(double phase) { return 0.5 + 0.5 * std::sin(phase); }

// Triangle wave in [0, 1] with period 1.
double tri(double t) {
  const double f = t - std::floor(t);
  return f < 0.5 ? 2.0 * f : 2.0 * (1.0 - f);
}

using Field = std::function<double(double, double)>;

Field make_stripes(Rng& rng, double angle) {
  const double period = rng.uniform(7.0, 15.0);
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  const double kx = std::cos(angle) * 2.0 * kPi / period;
  const double ky = std::sin(angle) * 2.0 * kPi / period;
  return [=](double x, double y) { return wave(kx * x + ky * y + phase); };
}

Field make_checker(Rng& rng) {
  const double cell = rng.uniform(5.0, 9.0);
  const double ox = rng.uniform(0.0, cell), oy = rng.uniform(0.0, cell);
  return [=](double x, double y) {
    const int ix = static_cast<int>(std::floor((x + ox) / cell));
    const int iy = static_cast<int>(std::floor((y + oy) / cell));
    return ((ix + iy) & 1) ? 1.0 : 0.0;
  };
}

Field make_dots(Rng& rng) {
  const double pitch = rng.uniform(10.0, 15.0);
  const double radius = rng.uniform(0.28, 0.38) * pitch;
  const double ox = rng.uniform(0.0, pitch), oy = rng.uniform(0.0, pitch);
  return [=](double x, double y) {
    const double lx = x + ox, ly = y + oy;
    const double cx = (std::floor(lx / pitch) + 0.5) * pitch;
    const double cy = (std::floor(ly / pitch) + 0.5) * pitch;
    const double d = std::hypot(lx - cx, ly - cy);
    // Soft one-pixel edge keeps the discs band-limited.
    return std::clamp(radius - d + 0.5, 0.0, 1.0);
  };
}

Field make_rings(Rng& rng, int size) {
  const double cx = rng.uniform(0.25, 0.75) * size;
  const double cy = rng.uniform(0.25, 0.75) * size;
  const double period = rng.uniform(7.0, 13.0);
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  return [=](double x, double y) {
    return wave(std::hypot(x - cx, y - cy) * 2.0 * kPi / period + phase);
  };
}

Field make_star(Rng& rng, int size) {
  const double cx = rng.uniform(0.35, 0.65) * size;
  const double cy = rng.uniform(0.35, 0.65) * size;
  const int spokes = 2 * (3 + rng.uniform_int(4));  // 6, 8, 10, or 12
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  return [=](double x, double y) {
    return wave(std::atan2(y - cy, x - cx) * spokes + phase);
  };
}

Field make_gradient(Rng& rng, int size) {
  const double angle = rng.uniform(0.0, 2.0 * kPi);
  const double kx = std::cos(angle) / size, ky = std::sin(angle) / size;
  const double offset = rng.uniform(0.0, 1.0);
  return [=](double x, double y) {
    const double t = kx * x + ky * y + offset;
    return tri(t + 10.0);  // shift keeps the argument positive
  };
}

Field make_blobs(Rng& rng, int size) {
  struct Term {
    double kx, ky, phase;
  };
  std::vector<Term> terms(3);
  for (auto& t : terms) {
    const double period = rng.uniform(0.45, 0.9) * size;
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    t.kx = std::cos(angle) * 2.0 * kPi / period;
    t.ky = std::sin(angle) * 2.0 * kPi / period;
    t.phase = rng.uniform(0.0, 2.0 * kPi);
  }
  return [terms](double x, double y) {
    double s = 0.0;
    for (const auto& t : terms) s += std::sin(t.kx * x + t.ky * y + t.phase);
    return 0.5 + s / 6.0;
  };
}

Field make_grid(Rng& rng) {
  const double pitch = rng.uniform(9.0, 14.0);
  const double line = rng.uniform(1.5, 2.5);
  const double ox = rng.uniform(0.0, pitch), oy = rng.uniform(0.0, pitch);
  return [=](double x, double y) {
    const double fx = std::fmod(x + ox, pitch);
    const double fy = std::fmod(y + oy, pitch);
    return (fx < line || fy < line) ? 0.0 : 1.0;
  };
}

Field make_zigzag(Rng& rng) {
  const double period = rng.uniform(8.0, 15.0);
  const double amp = rng.uniform(0.2, 0.35) * period;
  const bool flip = rng.bernoulli(0.5);
  const double phase = rng.uniform(0.0, period);
  return [=](double x, double y) {
    const double u = flip ? y : x;
    const double v = flip ? x : y;
    const double offset = amp * (2.0 * tri(v / period) - 1.0);
    return tri((u + offset + phase) / period) < 0.5 ? 0.0 : 1.0;
  };
}

Field make_cells(Rng& rng, int size) {
  struct Site {
    double x, y, level;
  };
  std::vector<Site> sites(5);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    sites[i].x = rng.uniform(0.0, 1.0) * size;
    sites[i].y = rng.uniform(0.0, 1.0) * size;
    sites[i].level = static_cast<double>(i) / (sites.size() - 1);
  }
  // Random level-to-site assignment so position never predicts brightness.
  for (std::size_t i = sites.size(); i > 1; --i)
    std::swap(sites[i - 1].level, sites[rng.uniform_int(static_cast<int>(i))].level);
  return [sites](double x, double y) {
    double best = 1e30, level = 0.0;
    for (const auto& s : sites) {
      const double d = (x - s.x) * (x - s.x) + (y - s.y) * (y - s.y);
      if (d < best) {
        best = d;
        level = s.level;
      }
    }
    return level;
  };
}

Field make_field(int family, Rng& rng, int size) {
  switch (family) {
    case 0: return make_stripes(rng, 0.0);
    case 1: return make_stripes(rng, kPi / 2.0);
    case 2: return make_stripes(rng, rng.bernoulli(0.5) ? kPi / 4.0 : -kPi / 4.0);
    case 3: return make_checker(rng);
    case 4: return make_dots(rng);
    case 5: return make_rings(rng, size);
    case 6: return make_star(rng, size);
    case 7: return make_gradient(rng, size);
    case 8: return make_blobs(rng, size);
    case 9: return make_grid(rng);
    case 10: return make_zigzag(rng);
    default: return make_cells(rng, size);
  }
}

}  // namespace

const std::vector<std::string>& texture_family_names() {
  static const std::vector<std::string> names = {
      "stripes_h", "stripes_v", "stripes_diag", "checker", "dots",   "rings",
      "starburst", "ramp",      "blobs",        "grid",    "zigzag", "cells"};
  return names;
}

imaging::Image synth_image(int class_id, int image_index, int size, std::uint64_t seed) {
  FIDCAL_CHECK(class_id >= 0 && image_index >= 0 && size >= 16,
               "synth_image: bad class, index, or size");
  Rng rng = Rng::stream(seed, {stream_tag::kSynth, static_cast<std::uint64_t>(class_id),
                               static_cast<std::uint64_t>(image_index)});
  const int family = class_id % static_cast<int>(texture_family_names().size());
  const ColorPair colors = draw_colors(rng);
  const Field field = make_field(family, rng, size);

  imaging::Image img = imaging::make_image(3, size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const float t = static_cast<float>(std::clamp(field(x, y), 0.0, 1.0));
      for (int ch = 0; ch < 3; ++ch) {
        const float base = colors.bg[ch] + t * (colors.fg[ch] - colors.bg[ch]);
        const float jitter = 0.01f * static_cast<float>(rng.normal());
        img.at(ch, y, x) = std::clamp(base + jitter, 0.0f, 1.0f);
      }
    }
  return img;
}

void synth_corpus(const std::string& root, int num_classes, int per_class, int size,
                  std::uint64_t seed) {
  FIDCAL_CHECK(num_classes >= 2 && per_class >= 1, "synth_corpus: need classes and images");
  const auto& families = texture_family_names();
  for (int cls = 0; cls < num_classes; ++cls) {
    char dir_name[64];
    std::snprintf(dir_name, sizeof(dir_name), "%02d_%s", cls,
                  families[cls % families.size()].c_str());
    const std::filesystem::path dir = std::filesystem::path(root) / dir_name;
    std::filesystem::create_directories(dir);
    for (int i = 0; i < per_class; ++i) {
      char file_name[32];
      std::snprintf(file_name, sizeof(file_name), "img_%04d.png", i);
      imaging::encode_png((dir / file_name).string(), synth_image(cls, i, size, seed));
    }
  }
}

}  // namespace fidcal::exp
