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

#include "smokeseg/imagery/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "smokeseg/errors.hpp"
#include "smokeseg/imagery/png.hpp"

namespace smokeseg::imagery {

using nlohmann::json;

namespace {

struct Point {
  double x, y;
  friend bool operator==(const Point&, const Point&) = default;
};

PixelClass class_from_name(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "smoke") return PixelClass::Smoke;
  if (lower == "cloud") return PixelClass::Cloud;
  if (lower == "clear") return PixelClass::Clear;
  throw LabelSchemaError("unknown label class '" + name + "' (expected Smoke, Cloud or Clear)");
}

double cross(const Point& a, const Point& b, const Point& p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return cross(a, b, p) == 0.0 && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
         p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

// Scanline fill at pixel-centre rows, then an exact pass over each edge so
// outline pixels are included even where the crossing count misses them
// (horizontal edges, local extrema through a centre).
void paint_polygon(const std::vector<Point>& poly, PixelClass cls, LabelMask& mask) {
  const int H = mask.height, W = mask.width;
  const std::size_t n = poly.size();
  std::vector<double> xs;
  for (int row = 0; row < H; ++row) {
    const double y = row + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = poly[i];
      const Point& b = poly[(i + 1) % n];
      if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int first = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int last = std::min(W - 1, static_cast<int>(std::floor(xs[k + 1] - 0.5)));
      for (int col = first; col <= last; ++col) mask.set(row, col, cls);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    const int r0 = std::max(0, static_cast<int>(std::ceil(std::min(a.y, b.y) - 0.5)));
    const int r1 = std::min(H - 1, static_cast<int>(std::floor(std::max(a.y, b.y) - 0.5)));
    const int c0 = std::max(0, static_cast<int>(std::ceil(std::min(a.x, b.x) - 0.5)));
    const int c1 = std::min(W - 1, static_cast<int>(std::floor(std::max(a.x, b.x) - 0.5)));
    for (int row = r0; row <= r1; ++row) {
      const double y = row + 0.5;
      int lo = c0, hi = c1;
      if (a.y != b.y) {
        const double x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
        lo = std::max(c0, static_cast<int>(std::floor(x - 0.5)) - 1);
        hi = std::min(c1, lo + 3);
      }
      for (int col = lo; col <= hi; ++col) {
        if (on_segment(a, b, {col + 0.5, row + 0.5})) mask.set(row, col, cls);
      }
    }
  }
}

}  // namespace

std::string to_string(PixelClass c) {
  switch (c) {
    case PixelClass::Gap:
      return "Gap";
    case PixelClass::Smoke:
      return "Smoke";
    case PixelClass::Cloud:
      return "Cloud";
    case PixelClass::Clear:
      return "Clear";
  }
  return "Gap";
}

std::size_t LabelMask::count(PixelClass c) const {
  return static_cast<std::size_t>(std::count(codes.begin(), codes.end(), static_cast<std::uint8_t>(c)));
}

RasterizedLabels rasterize_labels(const std::string& labelme_json, int height, int width) {
  json doc;
  try {
    doc = json::parse(labelme_json);
  } catch (const json::exception& e) {
    throw LabelSchemaError(std::string("annotation is not valid JSON: ") + e.what());
  }
  RasterizedLabels out{LabelMask(height, width), {}};
  if (!doc.is_object()) throw LabelSchemaError("annotation root must be an object");
  if (!doc.contains("shapes")) return out;
  const json& shapes = doc["shapes"];
  if (!shapes.is_array()) throw LabelSchemaError("'shapes' must be an array");

  for (std::size_t s = 0; s < shapes.size(); ++s) {
    const json& shape = shapes[s];
    const std::string where = "shape " + std::to_string(s);
    try {
      const PixelClass cls = class_from_name(shape.at("label").get<std::string>());
      const std::string type = shape.value("shape_type", std::string("polygon"));
      std::vector<Point> pts;
      for (const auto& p : shape.at("points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      for (const auto& p : pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw LabelSchemaError(where + ": non-finite vertex");
      }
      if (type == "rectangle") {
        if (pts.size() != 2) throw LabelSchemaError(where + ": rectangle needs two corner points");
        const Point a = pts[0], b = pts[1];
        pts = {a, {b.x, a.y}, b, {a.x, b.y}};
      } else if (type != "polygon") {
        out.warnings.push_back(where + ": shape type '" + type + "' is not supported, skipped");
        continue;
      }
      std::vector<Point> distinct;
      for (const auto& p : pts) {
        if (std::find(distinct.begin(), distinct.end(), p) == distinct.end()) distinct.push_back(p);
      }
      if (distinct.size() < 3) {
        out.warnings.push_back(where + ": fewer than three distinct vertices, skipped");
        continue;
      }
      paint_polygon(pts, cls, out.mask);
    } catch (const json::exception& e) {
      throw LabelSchemaError(where + ": " + e.what());
    }
  }
  return out;
}

RasterizedLabels rasterize_labels_file(const std::filesystem::path& path, int height, int width) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return rasterize_labels(ss.str(), height, width);
}

RgbImage mask_to_rgb(const LabelMask& mask) {
  RgbImage img{mask.height, mask.width, std::vector<std::uint8_t>(mask.codes.size() * 3, 0)};
  for (std::size_t i = 0; i < mask.codes.size(); ++i) {
    switch (static_cast<PixelClass>(mask.codes[i])) {
      case PixelClass::Smoke:
        img.rgb[3 * i] = 255;
        break;
      case PixelClass::Cloud:
        img.rgb[3 * i + 1] = 255;
        break;
      case PixelClass::Clear:
        img.rgb[3 * i + 2] = 255;
        break;
      case PixelClass::Gap:
        break;
      default:
        throw LabelSchemaError("mask holds invalid code " + std::to_string(mask.codes[i]));
    }
  }
  return img;
}

LabelMask rgb_to_mask(const RgbImage& image) {
  LabelMask mask(image.height, image.width);
  for (std::size_t i = 0; i < mask.codes.size(); ++i) {
    const int r = image.rgb[3 * i], g = image.rgb[3 * i + 1], b = image.rgb[3 * i + 2];
    PixelClass c;
    if (r == 0 && g == 0 && b == 0) {
      c = PixelClass::Gap;
    } else if (r == 255 && g == 0 && b == 0) {
      c = PixelClass::Smoke;
    } else if (r == 0 && g == 255 && b == 0) {
      c = PixelClass::Cloud;
    } else if (r == 0 && g == 0 && b == 255) {
      c = PixelClass::Clear;
    } else {
      throw LabelSchemaError("pixel (" + std::to_string(i / image.width) + ", " + std::to_string(i % image.width) +
                             ") has colour (" + std::to_string(r) + ", " + std::to_string(g) + ", " +
                             std::to_string(b) + "), which is not a class colour");
    }
    mask.codes[i] = static_cast<std::uint8_t>(c);
  }
  return mask;
}

LabelMask load_label(const std::filesystem::path& path, int height, int width) {
  if (path.extension() == ".json") return rasterize_labels_file(path, height, width).mask;
  LabelMask mask = rgb_to_mask(read_png(path));
  if (mask.height != height || mask.width != width) {
    throw PairingError(path.string() + ": mask is " + std::to_string(mask.height) + "x" + std::to_string(mask.width) +
                       ", image is " + std::to_string(height) + "x" + std::to_string(width));
  }
  return mask;
}

}  // namespace smokeseg::imagery
