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

#include "segkit/cocoeval.h"

#include <gtest/gtest.h>

#include <memory>

#include "oracles/generators.h"
#include "oracles/oracles.h"
#include "segkit/errors.h"

namespace segkit {
namespace {

using testing::MakeAnnotation;
using testing::MakeDetection;
using testing::RectMask;

std::optional<double> Ap(std::initializer_list<bool> labels, std::size_t num_gt) {
  const std::vector<char> tmp(labels.begin(), labels.end());
  auto flags = std::make_unique<bool[]>(tmp.size());
  for (std::size_t i = 0; i < tmp.size(); ++i) flags[i] = tmp[i] != 0;
  return average_precision_101(std::span<const bool>(flags.get(), tmp.size()),
                               num_gt);
}

Dataset OneImage(int h = 4, int w = 4) {
  Dataset ds;
  ds.images.push_back({1, w, h, "a.png", Json::object()});
  ds.categories.push_back({1, "cane", Json::object()});
  ds.categories.push_back({2, "person", Json::object()});
  return ds;
}

TEST(EvalParamsTest, Defaults) {
  const EvalParams p;
  ASSERT_EQ(p.iou_thresholds.size(), 10u);
  EXPECT_EQ(p.iou_thresholds.front(), 0.50);
  EXPECT_EQ(p.iou_thresholds[5], 0.75);
  EXPECT_EQ(p.iou_thresholds.back(), 0.95);
  ASSERT_EQ(p.recall_points.size(), 101u);
  EXPECT_EQ(p.recall_points[0], 0.0);
  EXPECT_EQ(p.recall_points[100], 1.0);
  EXPECT_EQ(p.max_dets_per_image, 100);
  EvalParams bad;
  bad.iou_thresholds = {0.6, 0.5};
  EXPECT_THROW(validate_eval_params(bad), ValidationError);
}

TEST(ApTest, Fixtures) {
  EXPECT_EQ(Ap({true}, 1), 1.0);
  EXPECT_EQ(Ap({false, true}, 1), 0.5);
  EXPECT_EQ(Ap({}, 1), 0.0);
  EXPECT_FALSE(Ap({true}, 0).has_value());
  // Half recall: points 0..0.50 score 1, the rest 0.
  EXPECT_DOUBLE_EQ(*Ap({true}, 2), 51.0 / 101.0);
}

TEST(MatchTest, SingleDetection) {
  const Dataset ds = OneImage();
  const std::vector<Annotation> gts{MakeAnnotation(1, 1, 1, RectMask(4, 4, 0, 0, 2, 2))};
  const std::vector<Detection> dets{MakeDetection(1, 1, 0.9, RectMask(4, 4, 0, 0, 2, 2))};
  // Drop one pixel: IoU 3/4.
  std::vector<Detection> three = dets;
  BinaryMask m = RectMask(4, 4, 0, 0, 2, 2);
  m.set(1, 1, false);
  three[0] = MakeDetection(1, 1, 0.9, m);
  auto r = match_image_category(gts, three, ds.images[0], 0.5, 100);
  ASSERT_EQ(r.is_tp.size(), 1u);
  EXPECT_TRUE(r.is_tp[0]);
  EXPECT_EQ(r.unmatched_gt, 0u);
  r = match_image_category(gts, three, ds.images[0], 0.80, 100);
  EXPECT_FALSE(r.is_tp[0]);
  EXPECT_EQ(r.unmatched_gt, 1u);
}

TEST(MatchTest, GreedyHandExecuted) {
  // Rows: d1 (0.9), d2 (0.8). Columns: G1, G2.
  IouMatrix m{2, 2, {0.8, 0.6, 0.7, 0.4}};
  const std::vector<double> scores{0.9, 0.8};
  const MatchResult r = greedy_match(scores, m, 0.5, 100);
  ASSERT_EQ(r.det_order, (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(r.is_tp[0]);
  EXPECT_EQ(r.matched_gt[0], 0u);
  EXPECT_FALSE(r.is_tp[1]);
  EXPECT_EQ(r.unmatched_gt, 1u);
}

TEST(MatchTest, TiesAndTruncation) {
  IouMatrix m{3, 1, {0.9, 0.9, 0.9}};
  const std::vector<double> scores{0.5, 0.7, 0.5};
  const MatchResult r = greedy_match(scores, m, 0.5, 2);
  EXPECT_EQ(r.det_order, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(r.is_tp, (std::vector<bool>{true, false}));
}

TEST(MatchTest, CrowdGroundTruthIgnored) {
  const Dataset ds = OneImage();
  Annotation crowd = MakeAnnotation(1, 1, 1, RectMask(4, 4, 0, 0, 2, 2));
  crowd.iscrowd = true;
  const std::vector<Annotation> gts{crowd};
  const std::vector<Detection> dets{MakeDetection(1, 1, 0.9, RectMask(4, 4, 0, 0, 2, 2))};
  const auto r = match_image_category(gts, dets, ds.images[0], 0.5, 100);
  EXPECT_FALSE(r.is_tp[0]);
  EXPECT_EQ(r.unmatched_gt, 0u);
}

TEST(EvaluateTest, PerfectPredictions) {
  Dataset ds = OneImage();
  ds.annotations.push_back(MakeAnnotation(1, 1, 1, RectMask(4, 4, 0, 0, 2, 2)));
  ds.annotations.push_back(MakeAnnotation(2, 1, 2, RectMask(4, 4, 2, 2, 2, 2)));
  std::vector<Detection> dets;
  for (const auto& a : ds.annotations) {
    dets.push_back(MakeDetection(1, a.category_id, 1.0,
                                 decode_segmentation(a.segmentation, ds.images[0])));
  }
  EXPECT_EQ(evaluate_map(ds, dets).mean_ap, 1.0);
  const EvalReport none = evaluate_map(ds, {});
  EXPECT_EQ(none.mean_ap, 0.0);
  EXPECT_EQ(none.evaluated_categories, 2u);
}

TEST(EvaluateTest, ThreeQuarterIouGivesSixTenths) {
  Dataset ds = OneImage();
  ds.annotations.push_back(MakeAnnotation(1, 1, 1, RectMask(4, 4, 0, 0, 2, 2)));
  BinaryMask m = RectMask(4, 4, 0, 0, 2, 2);
  m.set(1, 1, false);
  const EvalReport r = evaluate_map(ds, std::vector<Detection>{MakeDetection(1, 1, 0.9, m)});
  const CategoryEval& c = r.per_category.at(1);
  ASSERT_EQ(c.ap_per_threshold.size(), 10u);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(c.ap_per_threshold[t], t < 6 ? 1.0 : 0.0);
  EXPECT_NEAR(r.mean_ap, 0.6, 1e-12);
  EXPECT_TRUE(r.per_category.at(2).absent);
  EXPECT_EQ(r.evaluated_categories, 1u);
}

TEST(EvaluateTest, NoGroundTruthAnywhere) {
  const Dataset ds = OneImage();
  const EvalReport r = evaluate_map(
      ds, std::vector<Detection>{MakeDetection(1, 1, 0.9, RectMask(4, 4, 0, 0, 1, 1))});
  EXPECT_EQ(r.mean_ap, 0.0);
  EXPECT_EQ(r.evaluated_categories, 0u);
}

TEST(EvaluateTest, UnknownReferencesRejected) {
  const Dataset ds = OneImage();
  EXPECT_THROW(evaluate_map(ds, std::vector<Detection>{MakeDetection(
                                    9, 1, 0.9, RectMask(4, 4, 0, 0, 1, 1))}),
               ValidationError);
  EXPECT_THROW(evaluate_map(ds, std::vector<Detection>{MakeDetection(
                                    1, 9, 0.9, RectMask(4, 4, 0, 0, 1, 1))}),
               ValidationError);
}

TEST(EvaluateTest, MaxDetsPerImage) {
  Dataset ds = OneImage();
  ds.annotations.push_back(MakeAnnotation(1, 1, 1, RectMask(4, 4, 0, 0, 2, 2)));
  const std::vector<Detection> dets{
      MakeDetection(1, 1, 0.9, RectMask(4, 4, 3, 3, 1, 1)),
      MakeDetection(1, 1, 0.8, RectMask(4, 4, 0, 0, 2, 2))};
  EvalParams p;
  EXPECT_DOUBLE_EQ(evaluate_map(ds, dets, p).mean_ap, 0.5);
  p.max_dets_per_image = 1;
  EXPECT_EQ(evaluate_map(ds, dets, p).mean_ap, 0.0);
}

TEST(EvaluatePropertyTest, MatchesBruteForceOnTinyCases) {
  testing::TestRng rng(61);
  for (int t = 0; t < 300; ++t) {
    const testing::TinyCase tc = testing::RandomTinyCase(rng);
    const EvalReport got = evaluate_map(tc.gt, tc.dets, EvalParams{}, 1 + t % 3);
    const oracle::BruteForceReport want = oracle::brute_force_map(tc.gt, tc.dets);
    ASSERT_NEAR(got.mean_ap, want.mean_ap, 1e-9) << "case " << t;
    ASSERT_EQ(got.evaluated_categories, want.categories.size());
    for (const auto& c : want.categories) {
      const CategoryEval& g = got.per_category.at(c.category_id);
      ASSERT_EQ(g.num_gt, c.num_gt);
      ASSERT_NEAR(g.ap, c.ap, 1e-9);
      for (std::size_t k = 0; k < c.ap_per_threshold.size(); ++k) {
        ASSERT_NEAR(g.ap_per_threshold[k], c.ap_per_threshold[k], 1e-9);
      }
    }
  }
}

TEST(EvaluatePropertyTest, TrailingFalsePositiveNeverHelps) {
  testing::TestRng rng(62);
  for (int t = 0; t < 200; ++t) {
    testing::TinyCase tc = testing::RandomTinyCase(rng);
    const EvalReport before = evaluate_map(tc.gt, tc.dets);
    // A detection scored below everything, on a category with no ground truth
    // in that image, is a FP ranked after every TP.
    const ImageInfo& img = tc.gt.images[0];
    const std::int64_t cat = tc.gt.categories[0].id;
    bool has_gt = false;
    for (const auto& a : tc.gt.annotations) {
      has_gt |= a.image_id == img.id && a.category_id == cat && !a.iscrowd;
    }
    if (has_gt) continue;
    tc.dets.push_back(MakeDetection(img.id, cat, 0.0001,
                                    RectMask(img.height, img.width, 0, 0, 1, 1)));
    const EvalReport after = evaluate_map(tc.gt, tc.dets);
    for (const auto& [id, c] : after.per_category) {
      if (c.absent) continue;
      for (std::size_t k = 0; k < c.ap_per_threshold.size(); ++k) {
        ASSERT_LE(c.ap_per_threshold[k],
                  before.per_category.at(id).ap_per_threshold[k]);
      }
    }
  }
}

TEST(EvaluatePropertyTest, JobCountDoesNotChangeReport) {
  testing::TestRng rng(63);
  for (int t = 0; t < 50; ++t) {
    const testing::TinyCase tc = testing::RandomTinyCase(rng);
    const EvalParams p;
    const Json one = report_to_json(evaluate_map(tc.gt, tc.dets, p, 1), p);
    const Json four = report_to_json(evaluate_map(tc.gt, tc.dets, p, 4), p);
    ASSERT_EQ(one.dump(), four.dump());
  }
}

TEST(ReportTest, TableEndsWithMean) {
  Dataset ds = OneImage();
  ds.annotations.push_back(MakeAnnotation(1, 1, 1, RectMask(4, 4, 0, 0, 2, 2)));
  const std::string table = format_report_table(evaluate_map(ds, {}));
  EXPECT_NE(table.find("cane"), std::string::npos);
  EXPECT_NE(table.find("mean AP 0.0000"), std::string::npos) << table;
}

}  // namespace
}  // namespace segkit
