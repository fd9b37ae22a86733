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

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <utility>

#include "segkit/errors.h"
#include "segkit/parallel.h"

namespace segkit {

namespace {

struct Candidate {
  std::size_t index;
  double score;
  double original;
};

// Strict "a ranks before b" under the tie rule.
bool RanksBefore(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.original != b.original) return a.original > b.original;
  return a.index < b.index;
}

// Content-based order used before grouped suppression, so that the input
// order of a group never affects which of several tied detections wins.
bool CanonicalLess(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto ka = std::tie(a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h);
  const auto kb = std::tie(b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h);
  if (ka != kb) return ka < kb;
  const auto sa = std::tie(a.segmentation.height, a.segmentation.width,
                           a.segmentation.counts);
  const auto sb = std::tie(b.segmentation.height, b.segmentation.width,
                           b.segmentation.counts);
  if (sa != sb) return sa < sb;
  return a.extra.dump() < b.extra.dump();
}

}  // namespace

void validate_nms_params(const NmsParams& params) {
  std::vector<std::string> issues;
  if (!(params.sigma > 0)) issues.push_back("nms sigma must be positive");
  if (!(params.iou_threshold >= 0 && params.iou_threshold <= 1)) {
    issues.push_back("nms iou threshold must be in [0, 1]");
  }
  if (!(params.score_floor >= 0 && params.score_floor <= 1)) {
    issues.push_back("nms score floor must be in [0, 1]");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

NmsMethod parse_nms_method(std::string_view name) {
  if (name == "hard") return NmsMethod::kHard;
  if (name == "linear") return NmsMethod::kLinear;
  if (name == "gaussian") return NmsMethod::kGaussian;
  throw ValidationError("unknown nms method \"" + std::string(name) + "\"");
}

IouKind parse_iou_kind(std::string_view name) {
  if (name == "mask" || name == "segm") return IouKind::kMask;
  if (name == "bbox") return IouKind::kBbox;
  throw ValidationError("unknown iou kind \"" + std::string(name) + "\"");
}

std::vector<Detection> soft_nms(std::span<const Detection> dets,
                                const NmsParams& params) {
  validate_nms_params(params);
  if (dets.empty()) return {};
  for (const auto& d : dets) {
    if (d.image_id != dets[0].image_id || d.category_id != dets[0].category_id) {
      throw ValidationError(
          "soft_nms: detections span several images or categories");
    }
  }

  std::vector<IndexedMask> shapes;
  if (params.iou_kind == IouKind::kMask) {
    shapes.reserve(dets.size());
    for (const auto& d : dets) shapes.emplace_back(rle_decode(d.segmentation));
  }
  auto iou = [&](std::size_t i, std::size_t j) {
    return params.iou_kind == IouKind::kMask
               ? mask_iou(shapes[i], shapes[j])
               : bbox_iou(dets[i].bbox, dets[j].bbox);
  };

  std::vector<Candidate> live;
  live.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].score > 0 && dets[i].score >= params.score_floor) {
      live.push_back({i, dets[i].score, dets[i].score});
    }
  }

  std::vector<Detection> out;
  out.reserve(live.size());
  while (!live.empty()) {
    auto best_it = std::min_element(live.begin(), live.end(), RanksBefore);
    const Candidate best = *best_it;
    live.erase(best_it);
    Detection kept = dets[best.index];
    kept.score = best.score;
    out.push_back(std::move(kept));

    std::vector<Candidate> next;
    next.reserve(live.size());
    for (auto c : live) {
      const double overlap = iou(best.index, c.index);
      switch (params.method) {
        case NmsMethod::kHard:
          if (overlap > params.iou_threshold) c.score = 0;
          break;
        case NmsMethod::kLinear:
          if (overlap > params.iou_threshold) c.score *= (1.0 - overlap);
          break;
        case NmsMethod::kGaussian:
          c.score *= std::exp(-(overlap * overlap) / params.sigma);
          break;
      }
      if (c.score > 0 && c.score >= params.score_floor) next.push_back(c);
    }
    live = std::move(next);
  }
  return out;
}

std::vector<Detection> soft_nms_grouped(std::span<const Detection> dets,
                                        const NmsParams& params, int jobs) {
  validate_nms_params(params);
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Detection>>
      groups;
  for (const auto& d : dets) groups[{d.image_id, d.category_id}].push_back(d);

  std::vector<const std::vector<Detection>*> inputs;
  inputs.reserve(groups.size());
  for (auto& [key, group] : groups) {
    std::stable_sort(group.begin(), group.end(), CanonicalLess);
    inputs.push_back(&group);
  }
  std::vector<std::vector<Detection>> outputs(inputs.size());
  parallel_for(inputs.size(), jobs,
               [&](std::size_t i) { outputs[i] = soft_nms(*inputs[i], params); });

  std::vector<Detection> out;
  for (auto& group : outputs) {
    std::move(group.begin(), group.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace segkit
