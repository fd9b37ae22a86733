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

#ifndef SEGKIT_SOFT_NMS_H_
#define SEGKIT_SOFT_NMS_H_

#include <span>
#include <string_view>
#include <vector>

#include "segkit/coco_model.h"

namespace segkit {

enum class NmsMethod { kHard, kLinear, kGaussian };
enum class IouKind { kMask, kBbox };

struct NmsParams {
  NmsMethod method = NmsMethod::kGaussian;
  // Overlap above which hard/linear decay applies.
  double iou_threshold = 0.5;
  // Gaussian decay is exp(-iou^2 / sigma).
  double sigma = 0.5;
  // Detections whose decayed score drops below this are pruned.
  double score_floor = 0.001;
  IouKind iou_kind = IouKind::kMask;
};

// Throws ValidationError when sigma <= 0 or a threshold leaves [0, 1].
void validate_nms_params(const NmsParams& params);

NmsMethod parse_nms_method(std::string_view name);
IouKind parse_iou_kind(std::string_view name);

// Score-decay NMS over detections of one image and one category.
//
// Repeatedly emits the highest-scoring remaining detection and decays the
// rest by their overlap with it. Ties are broken by original score, then by
// input position. Output is ordered by final score, descending; geometry is
// never modified. Detections whose score reaches zero (hard suppression) or
// falls below `score_floor` are dropped.
std::vector<Detection> soft_nms(std::span<const Detection> dets,
                                const NmsParams& params);

// Applies soft_nms to every (image_id, category_id) group. Each group is
// first sorted into a content-based canonical order, so the result does not
// depend on input order. Groups are emitted in ascending key order; `jobs`
// > 1 processes groups concurrently without affecting the result.
std::vector<Detection> soft_nms_grouped(std::span<const Detection> dets,
                                        const NmsParams& params,
                                        int jobs = 1);

}  // namespace segkit

#endif  // SEGKIT_SOFT_NMS_H_
