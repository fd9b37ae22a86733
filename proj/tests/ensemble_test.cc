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

#include "segkit/ensemble.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "oracles/generators.h"
#include "segkit/cocoeval.h"
#include "segkit/errors.h"

namespace segkit {
namespace {

using testing::MakeDetection;
using testing::RectMask;

Dataset TwoCategories() {
  Dataset ds;
  ds.images.push_back({1, 4, 4, "a.png", Json::object()});
  ds.categories.push_back({1, "person", Json::object()});
  ds.categories.push_back({2, "cane", Json::object()});
  return ds;
}

struct Sources {
  std::vector<Detection> a, b;
};

Sources FixtureSources() {
  Sources s;
  s.a = {MakeDetection(1, 1, 0.9, RectMask(4, 4, 0, 0, 2, 2)),
         MakeDetection(1, 2, 0.8, RectMask(4, 4, 2, 2, 2, 2)),
         MakeDetection(1, 1, 0.7, RectMask(4, 4, 2, 0, 2, 2))};
  s.b = {MakeDetection(1, 1, 0.6, RectMask(4, 4, 0, 2, 2, 2)),
         MakeDetection(1, 2, 0.5, RectMask(4, 4, 1, 1, 2, 2))};
  return s;
}

TEST(RoutingTest, ParsesNamesAndIds) {
  const Dataset ds = TwoCategories();
  RoutingTable r = parse_routing("default=A,cane=B", ds);
  EXPECT_EQ(r.default_source, Source::kA);
  EXPECT_EQ(r.source_for(2), Source::kB);
  EXPECT_EQ(r.source_for(1), Source::kA);
  EXPECT_EQ(r.mode, EnsembleMode::kRoute);
  r = parse_routing("default=B,1=A,mode=merge", ds);
  EXPECT_EQ(r.source_for(1), Source::kA);
  EXPECT_EQ(r.source_for(2), Source::kB);
  EXPECT_EQ(r.mode, EnsembleMode::kMerge);
}

TEST(RoutingTest, RejectsUnknownAndMalformed) {
  const Dataset ds = TwoCategories();
  EXPECT_THROW(parse_routing("default=A,tree=B", ds), ValidationError);
  EXPECT_THROW(parse_routing("default=C", ds), ValidationError);
  EXPECT_THROW(parse_routing("cane", ds), ValidationError);
  EXPECT_THROW(parse_routing("mode=vote", ds), ValidationError);
}

TEST(RoutingTest, FromJson) {
  const Dataset ds = TwoCategories();
  const RoutingTable r = routing_from_json(
      Json::parse(R"({"default": "A", "overrides": {"cane": "B"}})"), ds);
  EXPECT_EQ(r.source_for(2), Source::kB);
  EXPECT_EQ(r.mode, EnsembleMode::kRoute);
}

TEST(IntegrateTest, RouteFixture) {
  const Dataset ds = TwoCategories();
  const Sources s = FixtureSources();
  const auto out = integrate_by_category(
      s.a, s.b, parse_routing("default=A,cane=B", ds), ds.categories);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0], s.a[0]);
  EXPECT_EQ(out[1], s.a[2]);
  EXPECT_EQ(out[2], s.b[1]);
}

TEST(IntegrateTest, IdentityRoutes) {
  const Dataset ds = TwoCategories();
  const Sources s = FixtureSources();
  EXPECT_EQ(integrate_by_category(s.a, s.b, RoutingTable{}, ds.categories), s.a);
  RoutingTable all_b;
  all_b.default_source = Source::kB;
  EXPECT_EQ(integrate_by_category(s.a, s.b, all_b, ds.categories), s.b);
}

TEST(IntegrateTest, UnknownOverrideRejected) {
  const Dataset ds = TwoCategories();
  RoutingTable r;
  r.overrides[99] = Source::kB;
  EXPECT_THROW(integrate_by_category({}, {}, r, ds.categories), ValidationError);
}

TEST(IntegrateTest, MergeRunsSoftNmsPerCategory) {
  const Dataset ds = TwoCategories();
  const Sources s = FixtureSources();
  RoutingTable r;
  r.mode = EnsembleMode::kMerge;
  std::vector<Detection> all = s.a;
  all.insert(all.end(), s.b.begin(), s.b.end());
  const auto out = integrate_by_category(s.a, s.b, r, ds.categories);
  EXPECT_EQ(out, soft_nms_grouped(all, NmsParams{}));
  for (const auto& d : out) {
    const bool in_a = std::any_of(s.a.begin(), s.a.end(), [&](const Detection& x) {
      return x.segmentation == d.segmentation;
    });
    const bool in_b = std::any_of(s.b.begin(), s.b.end(), [&](const Detection& x) {
      return x.segmentation == d.segmentation;
    });
    EXPECT_TRUE(in_a || in_b);
  }
}

TEST(IntegrateTest, RoutedCategoryApMatchesSource) {
  Dataset ds = TwoCategories();
  ds.annotations.push_back(testing::MakeAnnotation(1, 1, 1, RectMask(4, 4, 0, 0, 2, 2)));
  ds.annotations.push_back(testing::MakeAnnotation(2, 1, 2, RectMask(4, 4, 1, 1, 2, 2)));
  const Sources s = FixtureSources();
  const auto out = integrate_by_category(
      s.a, s.b, parse_routing("default=A,cane=B", ds), ds.categories);
  const EvalReport merged = evaluate_map(ds, out, EvalParams{});
  const EvalReport ra = evaluate_map(ds, s.a, EvalParams{});
  const EvalReport rb = evaluate_map(ds, s.b, EvalParams{});
  EXPECT_EQ(merged.per_category.at(1).ap, ra.per_category.at(1).ap);
  EXPECT_EQ(merged.per_category.at(2).ap, rb.per_category.at(2).ap);
  EXPECT_EQ(merged.per_category.at(2).ap, 1.0);
}

}  // namespace
}  // namespace segkit
