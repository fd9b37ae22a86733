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

#include "segkit/maskops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segkit/errors.h"

namespace segkit {

namespace {

void RequireSameDims(const BinaryMask& a, const BinaryMask& b,
                     const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ValidationError(std::string(what) + ": mask dimensions differ (" +
                          std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + " vs " +
                          std::to_string(b.height()) + "x" +
                          std::to_string(b.width()) + ")");
  }
}

// Even-odd fill of a single polygon into `mask`, sampling pixel centers.
void FillPolygon(const Polygon& poly, BinaryMask& mask) {
  const std::size_t n = poly.size() / 2;
  const int height = mask.height();
  const int width = mask.width();
  double min_y = std::numeric_limits<double>::infinity();
  double max_y = -min_y;
  for (std::size_t i = 0; i < n; ++i) {
    min_y = std::min(min_y, poly[2 * i + 1]);
    max_y = std::max(max_y, poly[2 * i + 1]);
  }
  if (!(max_y > min_y)) return;

  const int row_begin = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
  const int row_end =
      std::min(height, static_cast<int>(std::ceil(max_y - 0.5)) + 1);
  std::vector<double> crossings;
  crossings.reserve(n);
  for (int row = row_begin; row < row_end; ++row) {
    const double py = row + 0.5;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const double xi = poly[2 * i], yi = poly[2 * i + 1];
      const double xj = poly[2 * j], yj = poly[2 * j + 1];
      // Half-open in y, so a vertex on the scanline is counted once.
      if ((yi > py) != (yj > py)) {
        crossings.push_back((xj - xi) * (py - yi) / (yj - yi) + xi);
      }
    }
    std::sort(crossings.begin(), crossings.end());
    // A center px is inside iff an odd number of crossings lie strictly to
    // its right, i.e. px falls in [c[2k], c[2k+1]).
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const double lo = crossings[k];
      const double hi = crossings[k + 1];
      if (!(hi > 0.5) || lo >= width) continue;
      int col = std::max(0, static_cast<int>(std::floor(lo - 0.5)));
      while (col < width && col + 0.5 < lo) ++col;
      for (; col < width && col + 0.5 < hi; ++col) mask.set(row, col);
    }
  }
}

}  // namespace

BinaryMask::BinaryMask(int height, int width)
    : height_(height),
      width_(width),
      bits_(static_cast<std::size_t>(std::max(height, 0)) *
                static_cast<std::size_t>(std::max(width, 0)),
            0) {
  if (height < 0 || width < 0) {
    throw ValidationError("mask dimensions must be non-negative");
  }
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  if (height < 0 || width < 0 ||
      bits_.size() != static_cast<std::size_t>(height) * width) {
    throw ValidationError("mask bit count " + std::to_string(bits_.size()) +
                          " does not match " + std::to_string(height) + "x" +
                          std::to_string(width));
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

void validate_rle(const Rle& rle) {
  if (rle.height < 0 || rle.width < 0) {
    throw ValidationError("rle size must be non-negative");
  }
  std::uint64_t total = 0;
  for (auto c : rle.counts) total += c;
  const std::uint64_t expected =
      static_cast<std::uint64_t>(rle.height) * rle.width;
  if (total != expected) {
    throw ValidationError("rle counts sum to " + std::to_string(total) +
                          ", expected " + std::to_string(expected) + " for " +
                          std::to_string(rle.height) + "x" +
                          std::to_string(rle.width));
  }
}

Rle rle_encode(const BinaryMask& mask) {
  Rle rle{mask.height(), mask.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int col = 0; col < mask.width(); ++col) {
    for (int row = 0; row < mask.height(); ++row) {
      const std::uint8_t v = mask.at(row, col) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rle_decode(const Rle& rle) {
  validate_rle(rle);
  BinaryMask mask(rle.height, rle.width);
  const int h = rle.height;
  std::size_t pos = 0;
  bool fg = false;
  for (auto run : rle.counts) {
    if (fg) {
      for (std::size_t i = pos; i < pos + run; ++i) {
        mask.set(static_cast<int>(i % h), static_cast<int>(i / h));
      }
    }
    pos += run;
    fg = !fg;
  }
  return mask;
}

std::uint64_t rle_area(const Rle& rle) {
  std::uint64_t area = 0;
  for (std::size_t i = 1; i < rle.counts.size(); i += 2) area += rle.counts[i];
  return area;
}

// Same scheme as the reference COCO mask API: 5-bit groups offset by '0',
// with continuation bit 0x20, and counts beyond the second stored as deltas
// against the count two positions back.
std::string rle_to_string(const Rle& rle) {
  std::string out;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    std::int64_t x = rle.counts[i];
    if (i > 2) x -= static_cast<std::int64_t>(rle.counts[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      out.push_back(static_cast<char>(c + 48));
    }
  }
  return out;
}

Rle rle_from_string(std::string_view encoded, int height, int width) {
  Rle rle{height, width, {}};
  std::size_t p = 0;
  while (p < encoded.size()) {
    std::uint64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= encoded.size()) {
        throw ValidationError("truncated compressed rle string");
      }
      const int c = static_cast<unsigned char>(encoded[p]) - 48;
      if (c < 0 || c > 63 || k >= 12) {
        throw ValidationError("invalid compressed rle string at offset " +
                              std::to_string(p));
      }
      x |= static_cast<std::uint64_t>(c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= ~std::uint64_t{0} << (5 * k);
    }
    auto value = static_cast<std::int64_t>(x);
    if (rle.counts.size() > 2) {
      value += rle.counts[rle.counts.size() - 2];
    }
    if (value < 0 || value > std::numeric_limits<std::uint32_t>::max()) {
      throw ValidationError("compressed rle decodes to an out-of-range count");
    }
    rle.counts.push_back(static_cast<std::uint32_t>(value));
  }
  validate_rle(rle);
  return rle;
}

BinaryMask rasterize_polygons(std::span<const Polygon> polygons, int height,
                              int width) {
  BinaryMask mask(height, width);
  for (std::size_t i = 0; i < polygons.size(); ++i) {
    const auto& poly = polygons[i];
    if (poly.size() % 2 != 0 || poly.size() < 6) {
      throw ValidationError("polygon " + std::to_string(i) + " has " +
                            std::to_string(poly.size()) +
                            " coordinates; need an even count of at least 6");
    }
    FillPolygon(poly, mask);
  }
  return mask;
}

std::size_t mask_area(const BinaryMask& mask) {
  return static_cast<std::size_t>(
      std::count(mask.bits().begin(), mask.bits().end(), std::uint8_t{1}));
}

Box mask_bbox(const BinaryMask& mask) {
  int min_r = mask.height(), max_r = -1, min_c = mask.width(), max_c = -1;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      min_r = std::min(min_r, r);
      max_r = std::max(max_r, r);
      min_c = std::min(min_c, c);
      max_c = std::max(max_c, c);
    }
  }
  if (max_r < 0) return Box{};
  return Box{static_cast<double>(min_c), static_cast<double>(min_r),
             static_cast<double>(max_c - min_c + 1),
             static_cast<double>(max_r - min_r + 1)};
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  RequireSameDims(a, b, "mask_iou");
  std::size_t inter = 0, uni = 0;
  const auto ab = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    inter += ab[i] & bb[i];
    uni += ab[i] | bb[i];
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

IndexedMask::IndexedMask(BinaryMask m)
    : mask(std::move(m)), tight(mask_bbox(mask)), area(mask_area(mask)) {}

double mask_iou(const IndexedMask& a, const IndexedMask& b) {
  RequireSameDims(a.mask, b.mask, "mask_iou");
  const std::size_t total = a.area + b.area;
  if (total == 0) return 0.0;
  const int c0 = static_cast<int>(std::max(a.tight.x, b.tight.x));
  const int c1 =
      static_cast<int>(std::min(a.tight.x + a.tight.w, b.tight.x + b.tight.w));
  const int r0 = static_cast<int>(std::max(a.tight.y, b.tight.y));
  const int r1 =
      static_cast<int>(std::min(a.tight.y + a.tight.h, b.tight.y + b.tight.h));
  std::size_t inter = 0;
  for (int r = r0; r < r1; ++r) {
    const std::size_t row = static_cast<std::size_t>(r) * a.mask.width();
    const auto ab = a.mask.bits();
    const auto bb = b.mask.bits();
    for (int c = c0; c < c1; ++c) inter += ab[row + c] & bb[row + c];
  }
  return static_cast<double>(inter) / static_cast<double>(total - inter);
}

double bbox_iou(const Box& a, const Box& b) {
  const double iw =
      std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih =
      std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  const double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0)) return 0.0;
  return inter / uni;
}

BinaryMask hflip(const BinaryMask& mask) {
  BinaryMask out(mask.height(), mask.width());
  const int w = mask.width();
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < w; ++c) {
      if (mask.at(r, c)) out.set(r, w - 1 - c);
    }
  }
  return out;
}

Box hflip(const Box& box, int image_width) {
  return Box{image_width - box.x - box.w, box.y, box.w, box.h};
}

std::pair<BinaryMask, Box> hflip_geometry(const BinaryMask& mask,
                                          const Box& box, int image_width) {
  if (mask.width() != image_width) {
    throw ValidationError("hflip: mask width " + std::to_string(mask.width()) +
                          " differs from image width " +
                          std::to_string(image_width));
  }
  return {hflip(mask), hflip(box, image_width)};
}

void subtract_in_place(BinaryMask& mask, const BinaryMask& cut) {
  RequireSameDims(mask, cut, "subtract");
  auto dst = mask.mutable_bits();
  const auto src = cut.bits();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] &= ~src[i] & 1;
}

}  // namespace segkit
