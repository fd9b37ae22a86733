// Copyright 2026 The segkit Authors. All Rights Reserved.
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

// Binary-mask kernel: dense masks, COCO run-length encoding, polygon
// rasterization, overlap measures and horizontal flips.
//
// Run-length counts follow the COCO convention: the mask is scanned in
// column-major order (down column 0, then column 1, ...) and runs alternate
// background/foreground starting with a (possibly empty) background run.

#ifndef SEGKIT_MASKOPS_H_
#define SEGKIT_MASKOPS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace segkit {

// Axis-aligned box; (x, y) is the top-left corner, all values in pixels.
struct Box {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double area() const { return w * h; }
  bool operator==(const Box&) const = default;
};

// Dense row-major mask, one byte (0 or 1) per pixel.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width);
  // Throws ValidationError if bits.size() != height * width. Non-zero bytes
  // are normalized to 1.
  BinaryMask(int height, int width, std::vector<std::uint8_t> bits);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty_dims() const { return height_ == 0 || width_ == 0; }

  bool at(int row, int col) const {
    return bits_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  void set(int row, int col, bool value = true) {
    bits_[static_cast<std::size_t>(row) * width_ + col] = value ? 1 : 0;
  }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> mutable_bits() { return bits_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct Rle {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  bool operator==(const Rle&) const = default;
};

// Flat vertex list x0, y0, x1, y1, ...
using Polygon = std::vector<double>;

// Throws ValidationError unless the counts cover exactly height * width.
void validate_rle(const Rle& rle);

Rle rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const Rle& rle);

// Foreground pixel count straight from the runs (sum of odd-indexed counts).
std::uint64_t rle_area(const Rle& rle);

// COCO's compact character encoding of the counts array.
std::string rle_to_string(const Rle& rle);
Rle rle_from_string(std::string_view encoded, int height, int width);

// Union of the filled polygons. A pixel is set iff its center
// (col + 0.5, row + 0.5) lies inside a polygon under the even-odd rule.
// Anything outside the height x width frame is clipped.
BinaryMask rasterize_polygons(std::span<const Polygon> polygons, int height,
                              int width);

std::size_t mask_area(const BinaryMask& mask);
// Tight bounding box of the foreground; all zeros for an empty mask.
Box mask_bbox(const BinaryMask& mask);

// |a & b| / |a | b|, or 0 when both masks are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);
double bbox_iou(const Box& a, const Box& b);

BinaryMask hflip(const BinaryMask& mask);
Box hflip(const Box& box, int image_width);
std::pair<BinaryMask, Box> hflip_geometry(const BinaryMask& mask,
                                          const Box& box, int image_width);

// A mask with its tight box and area cached, for repeated overlap queries.
struct IndexedMask {
  IndexedMask() = default;
  explicit IndexedMask(BinaryMask m);

  BinaryMask mask;
  Box tight;
  std::size_t area = 0;
};

// Same value as mask_iou, scanning only the overlap of the tight boxes.
double mask_iou(const IndexedMask& a, const IndexedMask& b);

// Clears every pixel of `mask` that is set in `cut`. Dimensions must match.
void subtract_in_place(BinaryMask& mask, const BinaryMask& cut);

}  // namespace segkit

#endif  // SEGKIT_MASKOPS_H_
