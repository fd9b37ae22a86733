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

#include "segkit/soft_nms.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles/generators.h"
#include "oracles/oracles.h"
#include "segkit/errors.h"

namespace segkit {
namespace {

using testing::MakeDetection;
using testing::RandInt;
using testing::RectMask;
using testing::TestRng;

// Two 1x10 strips overlapping in 6 of 10 pixels: IoU exactly 0.6.
std::vector<Detection> OverlappingPair() {
  return {MakeDetection(1, 1, 0.9, RectMask(1, 10, 0, 0, 1, 8)),
          MakeDetection(1, 1, 0.8, RectMask(1, 10, 0, 2, 1, 8))};
}

NmsParams Params(NmsMethod method, double floor = 0.001) {
  NmsParams p;
  p.method = method;
  p.score_floor = floor;
  return p;
}

TEST(SoftNmsTest, PairIouIsSixTenths) {
  const auto pair = OverlappingPair();
  EXPECT_EQ(mask_iou(rle_decode(pair[0].segmentation),
                     rle_decode(pair[1].segmentation)),
            0.6);
}

TEST(SoftNmsTest, LinearFixture) {
  const auto out = soft_nms(OverlappingPair(), Params(NmsMethod::kLinear));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].score, 0.9);
  // 0.8 * 0.4 rounds to 0.32000000000000006 in binary64.
  EXPECT_EQ(out[1].score, 0.8 * (1.0 - 0.6));
  EXPECT_DOUBLE_EQ(out[1].score, 0.32);
}

TEST(SoftNmsTest, GaussianFixture) {
  const auto out = soft_nms(OverlappingPair(), Params(NmsMethod::kGaussian));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].score, 0.9);
  EXPECT_NEAR(out[1].score, 0.8 * std::exp(-0.72), 1e-12);
  EXPECT_NEAR(out[1].score, 0.3894, 1e-4);
}

TEST(SoftNmsTest, HardFixture) {
  const auto out = soft_nms(OverlappingPair(), Params(NmsMethod::kHard));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].score, 0.9);
}

TEST(SoftNmsTest, TrivialCases) {
  const std::vector<Detection> one{
      MakeDetection(1, 1, 0.7, RectMask(4, 4, 0, 0, 2, 2))};
  const std::vector<Detection> disjoint{
      MakeDetection(1, 1, 0.7, RectMask(4, 4, 0, 0, 2, 2)),
      MakeDetection(1, 1, 0.6, RectMask(4, 4, 2, 2, 2, 2))};
  for (auto m : {NmsMethod::kHard, NmsMethod::kLinear, NmsMethod::kGaussian}) {
    EXPECT_EQ(soft_nms(one, Params(m)), one);
    EXPECT_EQ(soft_nms(disjoint, Params(m)), disjoint);
  }
  EXPECT_TRUE(soft_nms({}, NmsParams{}).empty());
}

TEST(SoftNmsTest, MixedGroupsRejected) {
  auto dets = OverlappingPair();
  dets[1].category_id = 2;
  EXPECT_THROW(soft_nms(dets, NmsParams{}), ValidationError);
  dets[1].category_id = 1;
  dets[1].image_id = 2;
  EXPECT_THROW(soft_nms(dets, NmsParams{}), ValidationError);
}

TEST(SoftNmsTest, ParamValidation) {
  NmsParams p;
  p.sigma = 0;
  EXPECT_THROW(soft_nms(OverlappingPair(), p), ValidationError);
  p = NmsParams{};
  p.iou_threshold = 1.5;
  EXPECT_THROW(validate_nms_params(p), ValidationError);
  EXPECT_EQ(parse_nms_method("linear"), NmsMethod::kLinear);
  EXPECT_EQ(parse_iou_kind("segm"), IouKind::kMask);
  EXPECT_THROW(parse_nms_method("soft"), ValidationError);
}

TEST(SoftNmsTest, FloorPrunes) {
  NmsParams p = Params(NmsMethod::kLinear, 0.5);
  const auto out = soft_nms(OverlappingPair(), p);
  ASSERT_EQ(out.size(), 1u);
}

TEST(SoftNmsTest, BboxIouKind) {
  NmsParams p = Params(NmsMethod::kHard);
  p.iou_kind = IouKind::kBbox;
  // Masks are disjoint but the boxes coincide.
  BinaryMask a(2, 2, {1, 0, 0, 1});
  BinaryMask b(2, 2, {0, 1, 1, 0});
  const std::vector<Detection> dets{MakeDetection(1, 1, 0.9, a),
                                    MakeDetection(1, 1, 0.8, b)};
  EXPECT_EQ(soft_nms(dets, p).size(), 1u);
  p.iou_kind = IouKind::kMask;
  EXPECT_EQ(soft_nms(dets, p).size(), 2u);
}

std::vector<Detection> RandomGroup(TestRng& rng, int n, bool coarse) {
  const int h = RandInt(rng, 4, 12), w = RandInt(rng, 4, 12);
  std::vector<Detection> dets;
  for (int i = 0; i < n; ++i) {
    const double s = coarse ? RandInt(rng, 1, 5) / 5.0
                            : std::uniform_real_distribution<double>(0.01, 1)(rng);
    dets.push_back(MakeDetection(3, 4, s, testing::RandomRect(rng, h, w)));
  }
  return dets;
}

TEST(SoftNmsPropertyTest, SubsetWithDecreasedScoresSortedDescending) {
  TestRng rng(31);
  for (int t = 0; t < 200; ++t) {
    const auto dets = RandomGroup(rng, RandInt(rng, 1, 12), t % 2 == 0);
    for (auto m : {NmsMethod::kHard, NmsMethod::kLinear, NmsMethod::kGaussian}) {
      const auto out = soft_nms(dets, Params(m));
      ASSERT_FALSE(out.empty());
      const double top = std::max_element(dets.begin(), dets.end(),
                                          [](auto& a, auto& b) {
                                            return a.score < b.score;
                                          })->score;
      EXPECT_EQ(out[0].score, top);
      std::vector<bool> used(dets.size());
      for (std::size_t k = 0; k < out.size(); ++k) {
        if (k > 0) EXPECT_LE(out[k].score, out[k - 1].score);
        bool found = false;
        for (std::size_t i = 0; i < dets.size() && !found; ++i) {
          if (used[i]) continue;
          if (dets[i].segmentation == out[k].segmentation &&
              dets[i].bbox == out[k].bbox && out[k].score <= dets[i].score) {
            used[i] = found = true;
          }
        }
        EXPECT_TRUE(found);
      }
    }
  }
}

TEST(SoftNmsPropertyTest, HardModeEqualsGreedyNms) {
  TestRng rng(32);
  for (int t = 0; t < 100; ++t) {
    const auto dets = RandomGroup(rng, RandInt(rng, 1, 15), false);
    NmsParams p = Params(NmsMethod::kHard, 0.0);
    p.iou_threshold = RandInt(rng, 1, 9) / 10.0;
    const auto out = soft_nms(dets, p);
    std::vector<oracle::PixelSet> masks;
    std::vector<double> scores;
    for (const auto& d : dets) {
      masks.push_back(oracle::decode_counts(d.segmentation));
      scores.push_back(d.score);
    }
    const auto keep = oracle::greedy_nms(masks, scores, p.iou_threshold);
    ASSERT_EQ(out.size(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      EXPECT_EQ(out[k], dets[keep[k]]);
    }
  }
}

TEST(SoftNmsPropertyTest, GroupedIsPermutationInvariant) {
  TestRng rng(33);
  for (int t = 0; t < 100; ++t) {
    std::vector<Detection> dets;
    for (int g = 0; g < 3; ++g) {
      auto group = RandomGroup(rng, RandInt(rng, 1, 8), true);
      for (auto& d : group) {
        d.image_id = g % 2;
        d.category_id = g;
      }
      dets.insert(dets.end(), group.begin(), group.end());
    }
    const auto base = soft_nms_grouped(dets, NmsParams{});
    for (int k = 0; k < 5; ++k) {
      auto shuffled = dets;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      ASSERT_EQ(soft_nms_grouped(shuffled, NmsParams{}, 1 + k % 3), base);
    }
  }
}

TEST(SoftNmsPropertyTest, TieBreakUsesInputOrder) {
  // Identical score and identical mask: the first one wins.
  auto a = MakeDetection(1, 1, 0.5, RectMask(3, 3, 0, 0, 2, 2));
  auto b = a;
  a.extra["tag"] = "first";
  b.extra["tag"] = "second";
  const auto out = soft_nms(std::vector<Detection>{a, b}, Params(NmsMethod::kHard));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].extra["tag"], "first");
}

}  // namespace
}  // namespace segkit
