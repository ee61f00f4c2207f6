// Copyright 2026 The smokeseg Authors
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

#include "smokeseg/imagery/png.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "smokeseg/errors.hpp"

namespace smokeseg::imagery {

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  if (image.rgb.size() != static_cast<std::size_t>(image.height) * image.width * 3) {
    throw DataIntegrityError("write_png: buffer does not match image size");
  }
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  for (int r = 0; r < image.height; ++r) {
    auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < image.width; ++c) {
      const std::size_t i = (static_cast<std::size_t>(r) * image.width + c) * 3;
      row[c] = cv::Vec3b(image.rgb[i + 2], image.rgb[i + 1], image.rgb[i]);
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr, {cv::IMWRITE_PNG_COMPRESSION, 6});
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

RgbImage read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file " + path.string());
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot decode image " + path.string());
  RgbImage img{bgr.rows, bgr.cols, std::vector<std::uint8_t>(static_cast<std::size_t>(bgr.rows) * bgr.cols * 3)};
  for (int r = 0; r < bgr.rows; ++r) {
    const auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c) {
      const std::size_t i = (static_cast<std::size_t>(r) * bgr.cols + c) * 3;
      img.rgb[i] = row[c][2];
      img.rgb[i + 1] = row[c][1];
      img.rgb[i + 2] = row[c][0];
    }
  }
  return img;
}

}  // namespace smokeseg::imagery
