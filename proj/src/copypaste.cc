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

#include "segkit/copypaste.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "segkit/errors.h"
#include "segkit/parallel.h"

namespace segkit {

namespace {

int UniformInt(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Output pixel -> source pixel lookup along one axis, -1 for padding.
std::vector<int> AxisMap(int out_size, int src_size, int scaled_size,
                         int offset, bool flip) {
  std::vector<int> map(static_cast<std::size_t>(out_size), -1);
  for (int o = 0; o < out_size; ++o) {
    const int s = (flip ? out_size - 1 - o : o) + offset;
    if (s < 0 || s >= scaled_size) continue;
    const auto src = static_cast<int>(std::floor(
        (s + 0.5) * static_cast<double>(src_size) / scaled_size));
    map[o] = std::clamp(src, 0, src_size - 1);
  }
  return map;
}

BinaryMask Remap(const BinaryMask& src, const std::vector<int>& rows,
                 const std::vector<int>& cols) {
  BinaryMask out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0) continue;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c] >= 0 && src.at(rows[r], cols[c])) {
        out.set(static_cast<int>(r), static_cast<int>(c));
      }
    }
  }
  return out;
}

RgbImage Remap(const RgbImage& src, const std::vector<int>& rows,
               const std::vector<int>& cols) {
  RgbImage out(static_cast<int>(cols.size()), static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0) continue;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c] < 0) continue;
      const std::uint8_t* p = src.pixel(rows[r], cols[c]);
      std::copy(p, p + 3, out.pixel(static_cast<int>(r), static_cast<int>(c)));
    }
  }
  return out;
}

}  // namespace

void validate_augment_params(const AugmentParams& p) {
  std::vector<std::string> issues;
  if (!(p.short_side_min > 0 && p.short_side_min <= p.short_side_max)) {
    issues.push_back("short side range must satisfy 0 < min <= max");
  }
  if (p.long_side_cap <= 0) issues.push_back("long side cap must be positive");
  if (p.crop_width <= 0 || p.crop_height <= 0) {
    issues.push_back("crop size must be positive");
  }
  if (!(p.hflip_prob >= 0 && p.hflip_prob <= 1)) {
    issues.push_back("flip probability must be in [0, 1]");
  }
  if (p.paste_min < 0 || p.paste_min > p.paste_max) {
    issues.push_back("paste count range must satisfy 0 <= min <= max");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

double augment_scale_factor(int width, int height, int target_short,
                            const AugmentParams& params) {
  const int short_side = std::min(width, height);
  const int long_side = std::max(width, height);
  const double f = static_cast<double>(target_short) / short_side;
  return std::min(f, static_cast<double>(params.long_side_cap) / long_side);
}

GeometricPlan plan_geometry(int width, int height, int target_short,
                            const AugmentParams& params, Rng& rng) {
  GeometricPlan plan;
  if (width > 0 && height > 0) {
    plan.scale = augment_scale_factor(width, height, target_short, params);
    plan.scaled_width =
        std::max(1, static_cast<int>(std::lround(width * plan.scale)));
    plan.scaled_height =
        std::max(1, static_cast<int>(std::lround(height * plan.scale)));
  }
  plan.crop_x = UniformInt(rng, 0, std::max(0, plan.scaled_width - params.crop_width));
  plan.crop_y =
      UniformInt(rng, 0, std::max(0, plan.scaled_height - params.crop_height));
  plan.flip = std::bernoulli_distribution(params.hflip_prob)(rng);
  return plan;
}

GeometricPlan plan_geometry(int width, int height, const AugmentParams& params,
                            Rng& rng) {
  const int target_short =
      UniformInt(rng, params.short_side_min, params.short_side_max);
  return plan_geometry(width, height, target_short, params, rng);
}

AnnotatedImage apply_geometry(const AnnotatedImage& input,
                              const GeometricPlan& plan,
                              const AugmentParams& params) {
  AnnotatedImage out;
  out.image = input.image;
  out.image.width = params.crop_width;
  out.image.height = params.crop_height;
  if (input.image.width <= 0 || input.image.height <= 0 ||
      plan.scaled_width <= 0 || plan.scaled_height <= 0) {
    if (input.pixels) out.pixels = RgbImage(params.crop_width, params.crop_height);
    return out;
  }
  const auto rows = AxisMap(params.crop_height, input.image.height,
                            plan.scaled_height, plan.crop_y, false);
  const auto cols = AxisMap(params.crop_width, input.image.width,
                            plan.scaled_width, plan.crop_x, plan.flip);
  if (input.pixels) out.pixels = Remap(*input.pixels, rows, cols);
  for (const auto& ann : input.annotations) {
    const BinaryMask mask =
        Remap(decode_segmentation(ann.segmentation, input.image), rows, cols);
    if (mask_area(mask) == 0) continue;
    Annotation moved = ann;
    set_annotation_mask(moved, mask);
    out.annotations.push_back(std::move(moved));
  }
  return out;
}

AnnotatedImage geometric_augment(const AnnotatedImage& input,
                                 const AugmentParams& params, Rng& rng) {
  validate_augment_params(params);
  const GeometricPlan plan =
      plan_geometry(input.image.width, input.image.height, params, rng);
  return apply_geometry(input, plan, params);
}

AnnotatedImage copy_paste(const AnnotatedImage& target,
                          std::span<const AnnotatedImage> donors,
                          const AugmentParams& params, Rng& rng) {
  validate_augment_params(params);
  const int k = UniformInt(rng, params.paste_min, params.paste_max);
  if (k == 0) return target;

  struct PoolEntry {
    std::size_t donor;
    std::size_t annotation;
  };
  std::vector<PoolEntry> pool;
  for (std::size_t d = 0; d < donors.size(); ++d) {
    for (std::size_t a = 0; a < donors[d].annotations.size(); ++a) {
      if (!donors[d].annotations[a].iscrowd) pool.push_back({d, a});
    }
  }
  if (pool.empty()) {
    throw ValidationError("copy_paste: donor annotation pool is empty");
  }

  const int width = target.image.width;
  const int height = target.image.height;
  std::vector<BinaryMask> existing;
  existing.reserve(target.annotations.size());
  for (const auto& ann : target.annotations) {
    existing.push_back(decode_segmentation(ann.segmentation, target.image));
  }

  struct Pasted {
    std::int64_t category_id;
    BinaryMask mask;
  };
  std::vector<Pasted> pasted;
  std::optional<RgbImage> pixels;
  if (target.pixels) pixels.emplace(*target.pixels);

  for (int j = 0; j < k; ++j) {
    const PoolEntry pick =
        pool[UniformInt(rng, 0, static_cast<int>(pool.size()) - 1)];
    const AnnotatedImage& donor = donors[pick.donor];
    const Annotation& src_ann = donor.annotations[pick.annotation];
    const BinaryMask src = decode_segmentation(src_ann.segmentation, donor.image);
    const Box tight = mask_bbox(src);
    const int bx = static_cast<int>(tight.x), by = static_cast<int>(tight.y);
    const int pw = std::min(static_cast<int>(tight.w), width);
    const int ph = std::min(static_cast<int>(tight.h), height);
    const int ox = UniformInt(rng, 0, std::max(0, width - pw));
    const int oy = UniformInt(rng, 0, std::max(0, height - ph));

    BinaryMask mask(height, width);
    const bool copy_pixels = pixels.has_value() && donor.pixels.has_value();
    for (int r = 0; r < ph; ++r) {
      for (int c = 0; c < pw; ++c) {
        if (!src.at(by + r, bx + c)) continue;
        mask.set(oy + r, ox + c);
        if (copy_pixels) {
          const std::uint8_t* p = donor.pixels->pixel(by + r, bx + c);
          std::copy(p, p + 3, pixels->pixel(oy + r, ox + c));
        }
      }
    }
    for (auto& m : existing) subtract_in_place(m, mask);
    for (auto& p : pasted) subtract_in_place(p.mask, mask);
    pasted.push_back({src_ann.category_id, std::move(mask)});
  }

  AnnotatedImage out;
  out.image = target.image;
  out.pixels = std::move(pixels);
  std::int64_t next_id = 1;
  for (const auto& ann : target.annotations) next_id = std::max(next_id, ann.id + 1);
  for (std::size_t i = 0; i < target.annotations.size(); ++i) {
    if (mask_area(existing[i]) < std::max<std::size_t>(params.min_remaining_area, 1)) {
      continue;
    }
    Annotation ann = target.annotations[i];
    set_annotation_mask(ann, existing[i]);
    out.annotations.push_back(std::move(ann));
  }
  for (auto& p : pasted) {
    if (mask_area(p.mask) < std::max<std::size_t>(params.min_remaining_area, 1)) {
      continue;
    }
    Annotation ann;
    ann.id = next_id++;
    ann.image_id = target.image.id;
    ann.category_id = p.category_id;
    set_annotation_mask(ann, p.mask);
    out.annotations.push_back(std::move(ann));
  }
  return out;
}

std::vector<AnnotatedImage> split_dataset(const Dataset& dataset) {
  std::vector<AnnotatedImage> out;
  out.reserve(dataset.images.size());
  std::map<std::int64_t, std::size_t> slot;
  for (const auto& img : dataset.images) {
    slot.emplace(img.id, out.size());
    out.push_back({img, std::nullopt, {}});
  }
  for (const auto& ann : dataset.annotations) {
    auto it = slot.find(ann.image_id);
    if (it == slot.end()) {
      throw ValidationError("annotation " + std::to_string(ann.id) +
                            " references unknown image_id " +
                            std::to_string(ann.image_id));
    }
    out[it->second].annotations.push_back(ann);
  }
  return out;
}

Dataset join_dataset(std::span<const AnnotatedImage> images,
                     const Dataset& original) {
  Dataset ds;
  ds.categories = original.categories;
  ds.extra = original.extra;
  std::int64_t next_id = 1;
  for (const auto& ai : images) {
    ds.images.push_back(ai.image);
    for (auto ann : ai.annotations) {
      ann.id = next_id++;
      ann.image_id = ai.image.id;
      ds.annotations.push_back(std::move(ann));
    }
  }
  return ds;
}

std::vector<AnnotatedImage> augment_images(
    std::span<const AnnotatedImage> images, const AugmentParams& params,
    int jobs) {
  validate_augment_params(params);
  const std::size_t n = images.size();
  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (const auto& ai : images) {
    rngs.emplace_back(params.seed ^ static_cast<std::uint64_t>(ai.image.id));
  }
  std::vector<AnnotatedImage> geometric(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    geometric[i] = geometric_augment(images[i], params, rngs[i]);
  });

  std::vector<AnnotatedImage> out(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    std::size_t donor = i;
    if (n > 1) {
      // Uniform over the other images.
      donor = static_cast<std::size_t>(UniformInt(rngs[i], 0, static_cast<int>(n) - 2));
      if (donor >= i) ++donor;
    }
    std::span<const AnnotatedImage> donors(&geometric[donor], 1);
    bool pool_empty = true;
    for (const auto& ann : geometric[donor].annotations) {
      if (!ann.iscrowd) pool_empty = false;
    }
    if (pool_empty) {
      out[i] = geometric[i];
    } else {
      out[i] = copy_paste(geometric[i], donors, params, rngs[i]);
    }
  });
  return out;
}

}  // namespace segkit
