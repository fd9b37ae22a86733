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

#ifndef SEGKIT_ENSEMBLE_H_
#define SEGKIT_ENSEMBLE_H_

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "segkit/coco_model.h"
#include "segkit/soft_nms.h"

namespace segkit {

enum class Source { kA, kB };
enum class EnsembleMode { kRoute, kMerge };

// Per-category choice between two result sets.
struct RoutingTable {
  Source default_source = Source::kA;
  std::map<std::int64_t, Source> overrides;
  EnsembleMode mode = EnsembleMode::kRoute;

  Source source_for(std::int64_t category_id) const;
};

// Parses "default=A,cane=B"; category names resolve against the dataset's
// category table, falling back to numeric ids.
RoutingTable parse_routing(std::string_view spec, const Dataset& dataset);

// {"default": "A", "overrides": {"cane": "B"}, "mode": "route"}
RoutingTable routing_from_json(const Json& doc, const Dataset& dataset);

// Route mode keeps, per category, exactly the routed source's detections
// (A's in input order, then B's). Merge mode concatenates both sources and
// runs soft_nms per (image, category). Overrides naming a category absent
// from `categories` are rejected.
std::vector<Detection> integrate_by_category(
    std::span<const Detection> a, std::span<const Detection> b,
    const RoutingTable& routing, std::span<const Category> categories,
    const NmsParams& nms = {}, int jobs = 1);

}  // namespace segkit

#endif  // SEGKIT_ENSEMBLE_H_
