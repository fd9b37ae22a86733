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

#include <gtest/gtest.h>

#include "oracles/generators.h"
#include "oracles/oracles.h"
#include "segkit/errors.h"

namespace segkit {
namespace {

using testing::RandInt;
using testing::RandomMask;
using testing::RectMask;
using testing::TestRng;

BinaryMask Diagonal2x2() {
  BinaryMask m(2, 2);
  m.set(0, 0);
  m.set(1, 1);
  return m;
}

TEST(RleTest, EmptyMaskIsOneBackgroundRun) {
  const Rle rle = rle_encode(BinaryMask(2, 2));
  EXPECT_EQ(rle.counts, (std::vector<std::uint32_t>{4}));
}

TEST(RleTest, DiagonalScansColumnMajor) {
  const Rle rle = rle_encode(Diagonal2x2());
  EXPECT_EQ(rle.height, 2);
  EXPECT_EQ(rle.width, 2);
  EXPECT_EQ(rle.counts, (std::vector<std::uint32_t>{0, 1, 2, 1}));
}

TEST(RleTest, DecodeFixtures) {
  EXPECT_EQ(rle_decode({2, 2, {4}}), BinaryMask(2, 2));
  EXPECT_EQ(rle_decode({2, 2, {0, 4}}), BinaryMask(2, 2, {1, 1, 1, 1}));
  EXPECT_EQ(rle_decode({2, 2, {0, 1, 2, 1}}), Diagonal2x2());
}

TEST(RleTest, DecodeRejectsBadSum) {
  EXPECT_THROW(rle_decode({2, 2, {1, 1}}), ValidationError);
  EXPECT_THROW(rle_decode({2, 2, {3, 3}}), ValidationError);
}

TEST(RleTest, NonRectangularMaskEncodesColumnMajor) {
  // 2x3, row-major bits: 0 1 1 / 1 1 0 -> column-major 0 1 | 1 1 | 1 0
  const BinaryMask m(2, 3, {0, 1, 1, 1, 1, 0});
  EXPECT_EQ(rle_encode(m).counts, (std::vector<std::uint32_t>{1, 4, 1}));
}

TEST(RleTest, RoundTripRandomMasks) {
  TestRng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const int h = RandInt(rng, 0, 64);
    const int w = RandInt(rng, 0, 64);
    const BinaryMask m = RandomMask(rng, h, w, RandInt(rng, 0, 10) / 10.0);
    const Rle rle = rle_encode(m);
    ASSERT_EQ(rle_decode(rle), m);
    ASSERT_EQ(rle_area(rle), mask_area(m));
  }
}

TEST(RleTest, CompressedStringHandComputed) {
  EXPECT_EQ(rle_to_string({2, 2, {0, 1, 2, 1}}), "0120");
  // Fourth count is stored as 2 - 5 = -3: low bits 0b11101 -> 'M'.
  EXPECT_EQ(rle_to_string({1, 11, {3, 5, 1, 2}}), "351M");
  EXPECT_EQ(rle_from_string("351M", 1, 11).counts,
            (std::vector<std::uint32_t>{3, 5, 1, 2}));
}

TEST(RleTest, CompressedStringRoundTrip) {
  TestRng rng(12);
  for (int i = 0; i < 300; ++i) {
    const int h = RandInt(rng, 1, 64);
    const int w = RandInt(rng, 1, 64);
    const Rle rle = rle_encode(RandomMask(rng, h, w, 0.3));
    ASSERT_EQ(rle_from_string(rle_to_string(rle), h, w), rle);
  }
  // Long runs need several 5-bit groups.
  const Rle big{1000, 1000, {999'000, 1000}};
  EXPECT_EQ(rle_from_string(rle_to_string(big), 1000, 1000), big);
}

TEST(RleTest, CompressedStringRejectsGarbage) {
  EXPECT_THROW(rle_from_string("0120", 3, 3), ValidationError);  // sum 4 != 9
  EXPECT_THROW(rle_from_string("\x01", 1, 1), ValidationError);
  EXPECT_THROW(rle_from_string("o", 1, 1), ValidationError);  // truncated
}

TEST(RasterizeTest, SquareCoversSixteenPixels) {
  const std::vector<Polygon> polys{{0, 0, 4, 0, 4, 4, 0, 4}};
  const BinaryMask m = rasterize_polygons(polys, 8, 8);
  EXPECT_EQ(mask_area(m), oracle::rasterize_brute_force(polys, 8, 8).size());
  EXPECT_EQ(mask_area(m), 16u);
  EXPECT_EQ(mask_bbox(m), (Box{0, 0, 4, 4}));
}

TEST(RasterizeTest, OutsideFrameIsEmpty) {
  const std::vector<Polygon> polys{{20, 20, 30, 20, 30, 30}};
  EXPECT_EQ(mask_area(rasterize_polygons(polys, 8, 8)), 0u);
  const std::vector<Polygon> left{{-10, 0, -2, 0, -2, 8, -10, 8}};
  EXPECT_EQ(mask_area(rasterize_polygons(left, 8, 8)), 0u);
}

TEST(RasterizeTest, DisjointSquaresAdd) {
  const std::vector<Polygon> polys{{0, 0, 2, 0, 2, 2, 0, 2},
                                   {4, 4, 7, 4, 7, 7, 4, 7}};
  const BinaryMask m = rasterize_polygons(polys, 8, 8);
  EXPECT_EQ(mask_area(m), 4u + 9u);
  EXPECT_EQ(mask_area(m), oracle::rasterize_brute_force(polys, 8, 8).size());
}

TEST(RasterizeTest, ClipsPartiallyOutside) {
  const std::vector<Polygon> polys{{-3, -3, 2, -3, 2, 2, -3, 2}};
  EXPECT_EQ(mask_area(rasterize_polygons(polys, 8, 8)), 4u);
}

TEST(RasterizeTest, RejectsShortPolygons) {
  const std::vector<Polygon> two{{0, 0, 4, 4}};
  EXPECT_THROW(rasterize_polygons(two, 8, 8), ValidationError);
  const std::vector<Polygon> odd{{0, 0, 4, 0, 4}};
  EXPECT_THROW(rasterize_polygons(odd, 8, 8), ValidationError);
}

// Pixel-exact agreement with the point-query oracle, including concave and
// self-intersecting inputs and vertices exactly on pixel centers.
TEST(RasterizeTest, MatchesPointInPolygonOracle) {
  TestRng rng(13);
  std::uniform_real_distribution<double> coord(-3.0, 20.0);
  for (int i = 0; i < 500; ++i) {
    const int h = RandInt(rng, 1, 16);
    const int w = RandInt(rng, 1, 16);
    std::vector<Polygon> polys(static_cast<std::size_t>(RandInt(rng, 1, 2)));
    for (auto& p : polys) {
      const int n = RandInt(rng, 3, 7);
      for (int v = 0; v < n; ++v) {
        if (RandInt(rng, 0, 2) == 0) {
          p.push_back(RandInt(rng, 0, 16) + 0.5);
          p.push_back(RandInt(rng, 0, 16) + 0.5);
        } else {
          p.push_back(coord(rng));
          p.push_back(coord(rng));
        }
      }
    }
    const BinaryMask m = rasterize_polygons(polys, h, w);
    const oracle::PixelSet expected = oracle::rasterize_brute_force(polys, h, w);
    ASSERT_EQ(mask_area(m), expected.size()) << "case " << i;
    for (const auto& [r, c] : expected) ASSERT_TRUE(m.at(r, c));
  }
}

TEST(MaskIouTest, Fixtures) {
  const BinaryMask full(2, 2, {1, 1, 1, 1});
  const BinaryMask left(2, 2, {1, 0, 1, 0});
  const BinaryMask right(2, 2, {0, 1, 0, 1});
  EXPECT_EQ(mask_iou(full, full), 1.0);
  EXPECT_EQ(mask_iou(left, right), 0.0);
  EXPECT_EQ(mask_iou(full, left), 0.5);
  EXPECT_EQ(mask_iou(BinaryMask(2, 2), BinaryMask(2, 2)), 0.0);
  EXPECT_THROW(mask_iou(full, BinaryMask(2, 3)), ValidationError);
}

TEST(MaskIouTest, SymmetricAndIndexedAgree) {
  TestRng rng(14);
  for (int i = 0; i < 300; ++i) {
    const int h = RandInt(rng, 1, 20), w = RandInt(rng, 1, 20);
    const BinaryMask a = RandomMask(rng, h, w, 0.4);
    const BinaryMask b = testing::RandomRect(rng, h, w);
    const double ab = mask_iou(a, b);
    ASSERT_EQ(ab, mask_iou(b, a));
    ASSERT_EQ(ab, mask_iou(IndexedMask(a), IndexedMask(b)));
    ASSERT_EQ(ab, oracle::pixel_iou(oracle::decode_counts(rle_encode(a)),
                                    oracle::decode_counts(rle_encode(b))));
    if (mask_area(a) > 0) ASSERT_EQ(mask_iou(a, a), 1.0);
  }
}

TEST(MaskIouTest, MonotoneOnNestedMasks) {
  // Growing b inside a raises IoU(a, b) = |b| / |a|.
  const BinaryMask a = RectMask(6, 6, 0, 0, 6, 6);
  double prev = 0;
  for (int k = 1; k <= 6; ++k) {
    const double v = mask_iou(a, RectMask(6, 6, 0, 0, k, 6));
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_EQ(prev, 1.0);
}

TEST(BboxIouTest, Fixtures) {
  EXPECT_EQ(bbox_iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(bbox_iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0);
  EXPECT_EQ(bbox_iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
  EXPECT_EQ(bbox_iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
}

TEST(HflipTest, BoxArithmetic) {
  EXPECT_EQ(hflip(Box{10, 5, 20, 30}, 100), (Box{70, 5, 20, 30}));
}

TEST(HflipTest, LeftColumnBecomesRightColumn) {
  const BinaryMask left(2, 2, {1, 0, 1, 0});
  const auto [mask, box] = hflip_geometry(left, mask_bbox(left), 2);
  EXPECT_EQ(mask, BinaryMask(2, 2, {0, 1, 0, 1}));
  EXPECT_EQ(box, mask_bbox(mask));
}

TEST(HflipTest, Involution) {
  TestRng rng(15);
  for (int i = 0; i < 100; ++i) {
    const int h = RandInt(rng, 1, 12), w = RandInt(rng, 1, 12);
    const BinaryMask m = RandomMask(rng, h, w, 0.5);
    const Box b = mask_bbox(m);
    const auto once = hflip_geometry(m, b, w);
    if (mask_area(m) > 0) EXPECT_EQ(once.second, mask_bbox(once.first));
    const auto twice = hflip_geometry(once.first, once.second, w);
    ASSERT_EQ(twice.first, m);
    ASSERT_EQ(twice.second, b);
  }
}

TEST(HflipTest, WidthMismatchThrows) {
  EXPECT_THROW(hflip_geometry(BinaryMask(2, 3), Box{}, 4), ValidationError);
}

TEST(MaskTest, BboxAndAreaOfEmpty) {
  EXPECT_EQ(mask_bbox(BinaryMask(3, 3)), Box{});
  EXPECT_EQ(mask_area(BinaryMask(3, 3)), 0u);
}

TEST(MaskTest, ConstructorValidatesSize) {
  EXPECT_THROW(BinaryMask(2, 2, {1, 0, 1}), ValidationError);
  EXPECT_EQ(BinaryMask(1, 2, {7, 0}).bits()[0], 1);
}

TEST(MaskTest, SubtractInPlace) {
  BinaryMask full(2, 2, {1, 1, 1, 1});
  subtract_in_place(full, BinaryMask(2, 2, {1, 0, 1, 0}));
  EXPECT_EQ(full, BinaryMask(2, 2, {0, 1, 0, 1}));
}

}  // namespace
}  // namespace segkit
