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

// Training-time augmentation: the scale-jitter / crop / pad / flip chain and
// Copy-Paste instance transplanting.
//
// All randomness comes from the caller's generator, so a fixed seed gives
// bit-identical output. Pixel buffers are optional; without them every mask
// and annotation update still happens.

#ifndef SEGKIT_COPYPASTE_H_
#define SEGKIT_COPYPASTE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "segkit/coco_model.h"
#include "segkit/image.h"

namespace segkit {

using Rng = std::mt19937_64;

struct AugmentParams {
  // Short side is drawn uniformly from [short_side_min, short_side_max],
  // then the scale is capped so the long side stays within long_side_cap.
  int short_side_min = 720;
  int short_side_max = 1620;
  int long_side_cap = 1920;
  int crop_width = 1920;
  int crop_height = 1080;
  double hflip_prob = 0.5;
  int paste_min = 1;
  int paste_max = 3;
  // Annotations left with fewer pixels than this (at least 1) after
  // occlusion are dropped.
  std::size_t min_remaining_area = 1;
  std::uint64_t seed = 0;
};

void validate_augment_params(const AugmentParams& params);

struct AnnotatedImage {
  ImageInfo image;
  std::optional<RgbImage> pixels;
  std::vector<Annotation> annotations;
};

// Scale that maps the short side to `target_short`, capped by the long side.
double augment_scale_factor(int width, int height, int target_short,
                            const AugmentParams& params);

// The random choices of one geometric_augment call.
struct GeometricPlan {
  double scale = 1;
  int scaled_width = 0;
  int scaled_height = 0;
  int crop_x = 0;  // window origin in the scaled image
  int crop_y = 0;
  bool flip = false;
};

GeometricPlan plan_geometry(int width, int height, int target_short,
                            const AugmentParams& params, Rng& rng);
GeometricPlan plan_geometry(int width, int height, const AugmentParams& params,
                            Rng& rng);

// Resizes (nearest neighbour, masks and pixels alike), crops, zero-pads to
// the crop size at the top-left, then flips. Annotations that end up empty
// are dropped; the rest get RLE masks with recomputed area and bbox.
AnnotatedImage apply_geometry(const AnnotatedImage& input,
                              const GeometricPlan& plan,
                              const AugmentParams& params);

AnnotatedImage geometric_augment(const AnnotatedImage& input,
                                 const AugmentParams& params, Rng& rng);

// Pastes k ~ U[paste_min, paste_max] donor instances into `target`.
//
// Each instance is drawn uniformly from the pooled non-crowd donor
// annotations, cut to its tight box and placed at a uniform position inside
// the target frame (clipped at the top-left if larger than the frame).
// Pasted pixels overwrite what lies underneath: earlier annotations,
// including earlier pastes, lose the covered pixels and are dropped if
// fewer than min_remaining_area remain. New annotations are appended with
// ids above the target's current maximum. k == 0 returns `target` as is.
// Throws ValidationError if k > 0 and the donor pool is empty.
AnnotatedImage copy_paste(const AnnotatedImage& target,
                          std::span<const AnnotatedImage> donors,
                          const AugmentParams& params, Rng& rng);

// Splits a dataset into per-image records, in image order.
std::vector<AnnotatedImage> split_dataset(const Dataset& dataset);
// Inverse of split_dataset; annotation ids are renumbered 1..N.
Dataset join_dataset(std::span<const AnnotatedImage> images,
                     const Dataset& original);

// Dataset-level driver. Image i uses a generator seeded with
// seed ^ image_id: it is geometrically augmented, then receives pastes from
// one other augmented image chosen uniformly (itself when alone). Results do
// not depend on `jobs`.
std::vector<AnnotatedImage> augment_images(
    std::span<const AnnotatedImage> images, const AugmentParams& params,
    int jobs = 1);

}  // namespace segkit

#endif  // SEGKIT_COPYPASTE_H_
