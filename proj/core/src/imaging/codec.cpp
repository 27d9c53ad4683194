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

#include "fidcal/imaging/codec.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace fidcal::imaging {

Image decode_image(const std::string& path) {
  cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
  FIDCAL_CHECK(!raw.empty(), "decode_image: cannot decode " + path);

  cv::Mat mat;
  if (raw.channels() == 4) {
    cv::cvtColor(raw, mat, cv::COLOR_BGRA2BGR);
  } else {
    mat = raw;
  }
  if (mat.depth() == CV_16U) {
    mat.convertTo(mat, CV_MAKETYPE(CV_8U, mat.channels()), 1.0 / 257.0);
  }
  FIDCAL_CHECK(mat.depth() == CV_8U, "decode_image: unsupported bit depth in " + path);

  const int c = mat.channels(), h = mat.rows, w = mat.cols;
  FIDCAL_CHECK(c == 1 || c == 3, "decode_image: unsupported channel count in " + path);
  Image img({c, h, w});
  const float scale = 1.0f / 255.0f;
  for (int y = 0; y < h; ++y) {
    const unsigned char* row = mat.ptr<unsigned char>(y);
    for (int x = 0; x < w; ++x) {
      if (c == 1) {
        img.at(0, y, x) = row[x] * scale;
      } else {
        // OpenCV stores BGR; the pipeline works in RGB.
        img.at(0, y, x) = row[3 * x + 2] * scale;
        img.at(1, y, x) = row[3 * x + 1] * scale;
        img.at(2, y, x) = row[3 * x + 0] * scale;
      }
    }
  }
  return img;
}

void encode_png(const std::string& path, const Image& img) {
  const int c = channels(img), h = height(img), w = width(img);
  FIDCAL_CHECK(c == 1 || c == 3, "encode_png: expected 1 or 3 channels");

  cv::Mat mat(h, w, c == 1 ? CV_8UC1 : CV_8UC3);
  auto to_u8 = [](float v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  };
  for (int y = 0; y < h; ++y) {
    unsigned char* row = mat.ptr<unsigned char>(y);
    for (int x = 0; x < w; ++x) {
      if (c == 1) {
        row[x] = to_u8(img.at(0, y, x));
      } else {
        row[3 * x + 0] = to_u8(img.at(2, y, x));
        row[3 * x + 1] = to_u8(img.at(1, y, x));
        row[3 * x + 2] = to_u8(img.at(0, y, x));
      }
    }
  }
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  FIDCAL_CHECK(cv::imwrite(path, mat), "encode_png: failed to write " + path);
}

bool is_image_file(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".webp";
}

}  // namespace fidcal::imaging
