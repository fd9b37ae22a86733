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

// Flip test-time augmentation: map detections from a horizontally flipped
// image back onto the original frame and fuse them with the unflipped
// branch. Fusion is concatenation followed by per-category soft_nms.

#ifndef SEGKIT_TTA_H_
#define SEGKIT_TTA_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "segkit/coco_model.h"
#include "segkit/soft_nms.h"

namespace segkit {

// Every detection must carry a mask `image_width` pixels wide.
std::vector<Detection> unflip_detections(std::span<const Detection> dets,
                                         int image_width);

// Multi-image variant; widths are looked up by image id.
std::vector<Detection> unflip_detections(
    std::span<const Detection> dets,
    const std::map<std::int64_t, int>& image_widths);

// All branches must describe the same image.
std::vector<Detection> fuse_detections(
    std::span<const std::vector<Detection>> branches, const NmsParams& params);

// Fuses an original and an (already unflipped) flipped result list covering
// any number of images; output is grouped by (image_id, category_id).
std::vector<Detection> fuse_result_sets(
    std::span<const std::vector<Detection>> branches, const NmsParams& params,
    int jobs = 1);

}  // namespace segkit

#endif  // SEGKIT_TTA_H_
