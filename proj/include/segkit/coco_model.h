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

// COCO-style data model: ground-truth datasets and detection result lists,
// plus their JSON readers and writers.
//
// Keys this toolkit does not interpret (licenses, info, supercategory, ...)
// are kept in `extra` and written back out unchanged.

#ifndef SEGKIT_COCO_MODEL_H_
#define SEGKIT_COCO_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "segkit/maskops.h"

namespace segkit {

using Json = nlohmann::ordered_json;

struct ImageInfo {
  std::int64_t id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;
  Json extra = Json::object();

  bool operator==(const ImageInfo&) const = default;
};

struct Category {
  std::int64_t id = 0;
  std::string name;
  Json extra = Json::object();

  bool operator==(const Category&) const = default;
};

using Segmentation = std::variant<std::vector<Polygon>, Rle>;

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Segmentation segmentation;
  double area = 0;
  Box bbox;
  bool iscrowd = false;
  Json extra = Json::object();

  bool operator==(const Annotation&) const = default;
};

struct Dataset {
  std::vector<ImageInfo> images;
  std::vector<Category> categories;
  std::vector<Annotation> annotations;
  Json extra = Json::object();

  const ImageInfo* find_image(std::int64_t id) const;
  const Category* find_category(std::int64_t id) const;
  const Category* find_category(std::string_view name) const;

  bool operator==(const Dataset&) const = default;
};

struct Detection {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  double score = 0;
  Rle segmentation;
  Box bbox;
  Json extra = Json::object();

  bool operator==(const Detection&) const = default;
};

// Decodes polygons or RLE into a mask sized to `image`.
BinaryMask decode_segmentation(const Segmentation& seg, const ImageInfo& image);

// Replaces the segmentation with the RLE of `mask` and recomputes area and
// bbox from it.
void set_annotation_mask(Annotation& ann, const BinaryMask& mask);

// Throws ValidationError listing every broken invariant.
void validate_dataset(const Dataset& dataset);

Dataset dataset_from_json(const Json& doc);
Json dataset_to_json(const Dataset& dataset);
Dataset parse_dataset_text(std::string_view text);
Dataset parse_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Without a dataset only intrinsic checks run (score range, RLE sums);
// with one, image/category references and RLE sizes are checked as well.
std::vector<Detection> results_from_json(const Json& doc,
                                         const Dataset* dataset = nullptr);
Json results_to_json(std::span<const Detection> dets);
std::vector<Detection> parse_results_text(std::string_view text,
                                          const Dataset* dataset = nullptr);
std::vector<Detection> parse_results(const std::filesystem::path& path,
                                     const Dataset& dataset);
std::vector<Detection> parse_results(const std::filesystem::path& path);
void write_results(std::span<const Detection> dets,
                   const std::filesystem::path& path);

// Parses a JSON document, mapping syntax errors to ParseError.
Json parse_json_text(std::string_view text);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& doc, const std::filesystem::path& path);

}  // namespace segkit

#endif  // SEGKIT_COCO_MODEL_H_
