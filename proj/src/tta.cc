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

#include "segkit/tta.h"

#include "segkit/errors.h"

namespace segkit {

namespace {

Detection Unflip(const Detection& det, int image_width) {
  if (det.segmentation.width != image_width) {
    throw ValidationError("unflip: detection on image " +
                          std::to_string(det.image_id) + " has mask width " +
                          std::to_string(det.segmentation.width) +
                          ", expected " + std::to_string(image_width));
  }
  auto [mask, box] =
      hflip_geometry(rle_decode(det.segmentation), det.bbox, image_width);
  Detection out = det;
  out.segmentation = rle_encode(mask);
  out.bbox = box;
  return out;
}

}  // namespace

std::vector<Detection> unflip_detections(std::span<const Detection> dets,
                                         int image_width) {
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) out.push_back(Unflip(d, image_width));
  return out;
}

std::vector<Detection> unflip_detections(
    std::span<const Detection> dets,
    const std::map<std::int64_t, int>& image_widths) {
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) {
    auto it = image_widths.find(d.image_id);
    if (it == image_widths.end()) {
      throw ValidationError("unflip: no width known for image " +
                            std::to_string(d.image_id));
    }
    out.push_back(Unflip(d, it->second));
  }
  return out;
}

std::vector<Detection> fuse_detections(
    std::span<const std::vector<Detection>> branches, const NmsParams& params) {
  std::vector<Detection> all;
  for (const auto& branch : branches) {
    for (const auto& d : branch) {
      if (!all.empty() && d.image_id != all.front().image_id) {
        throw ValidationError("fuse_detections: branches mix image ids " +
                              std::to_string(all.front().image_id) + " and " +
                              std::to_string(d.image_id));
      }
      all.push_back(d);
    }
  }
  return soft_nms_grouped(all, params);
}

std::vector<Detection> fuse_result_sets(
    std::span<const std::vector<Detection>> branches, const NmsParams& params,
    int jobs) {
  std::vector<Detection> all;
  for (const auto& branch : branches) all.insert(all.end(), branch.begin(), branch.end());
  return soft_nms_grouped(all, params, jobs);
}

}  // namespace segkit
