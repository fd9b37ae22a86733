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

#ifndef SEGKIT_IMAGE_H_
#define SEGKIT_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace segkit {

// 8-bit RGB, row-major, channels interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(std::size_t(w) * h * 3, 0) {}

  std::uint8_t* pixel(int row, int col) {
    return data.data() + (std::size_t(row) * width + col) * 3;
  }
  const std::uint8_t* pixel(int row, int col) const {
    return data.data() + (std::size_t(row) * width + col) * 3;
  }

  bool operator==(const RgbImage&) const = default;
};

RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace segkit

#endif  // SEGKIT_IMAGE_H_
