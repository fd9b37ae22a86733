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

#include "segkit/coco_model.h"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "segkit/errors.h"

namespace segkit {

namespace {

constexpr char kImages[] = "images";
constexpr char kAnnotations[] = "annotations";
constexpr char kCategories[] = "categories";
constexpr char kId[] = "id";
constexpr char kImageId[] = "image_id";
constexpr char kCategoryId[] = "category_id";
constexpr char kWidth[] = "width";
constexpr char kHeight[] = "height";
constexpr char kFileName[] = "file_name";
constexpr char kName[] = "name";
constexpr char kSegmentation[] = "segmentation";
constexpr char kArea[] = "area";
constexpr char kBbox[] = "bbox";
constexpr char kIsCrowd[] = "iscrowd";
constexpr char kScore[] = "score";
constexpr char kSize[] = "size";
constexpr char kCounts[] = "counts";

const Json& Field(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(where + ": missing \"" + key + "\"");
  }
  return *it;
}

std::int64_t GetInt(const Json& obj, const char* key, const std::string& where) {
  const Json& v = Field(obj, key, where);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) {
      return static_cast<std::int64_t>(d);
    }
  }
  throw ValidationError(where + ": \"" + key + "\" must be an integer");
}

double GetNumber(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + " must be a number");
  return v.get<double>();
}

Json Extras(const Json& obj, std::initializer_list<const char*> known) {
  Json extra = Json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (const char* k : known) {
      if (it.key() == k) {
        is_known = true;
        break;
      }
    }
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

void AppendExtras(Json& out, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    if (!out.contains(it.key())) out[it.key()] = it.value();
  }
}

Box BoxFromJson(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) {
    throw ValidationError(where + ": bbox must be [x, y, w, h]");
  }
  Box b{GetNumber(v[0], where + ".bbox[0]"), GetNumber(v[1], where + ".bbox[1]"),
        GetNumber(v[2], where + ".bbox[2]"),
        GetNumber(v[3], where + ".bbox[3]")};
  if (b.w < 0 || b.h < 0) {
    throw ValidationError(where + ": bbox extent must be non-negative");
  }
  return b;
}

Json BoxToJson(const Box& b) { return Json::array({b.x, b.y, b.w, b.h}); }

Rle RleFromJson(const Json& v, const std::string& where) {
  const Json& size = Field(v, kSize, where);
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer()) {
    throw ValidationError(where + ": rle size must be [h, w] integers");
  }
  const auto h = size[0].get<std::int64_t>();
  const auto w = size[1].get<std::int64_t>();
  if (h < 0 || w < 0 || h > INT32_MAX || w > INT32_MAX) {
    throw ValidationError(where + ": rle size out of range");
  }
  const Json& counts = Field(v, kCounts, where);
  Rle rle;
  if (counts.is_string()) {
    rle = rle_from_string(counts.get<std::string>(), static_cast<int>(h),
                          static_cast<int>(w));
  } else if (counts.is_array()) {
    rle.height = static_cast<int>(h);
    rle.width = static_cast<int>(w);
    rle.counts.reserve(counts.size());
    for (const auto& c : counts) {
      if (!c.is_number_integer() || c.get<std::int64_t>() < 0 ||
          c.get<std::int64_t>() > UINT32_MAX) {
        throw ValidationError(where +
                              ": rle counts must be non-negative integers");
      }
      rle.counts.push_back(c.get<std::uint32_t>());
    }
  } else {
    throw ValidationError(where + ": rle counts must be an array or string");
  }
  try {
    validate_rle(rle);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return rle;
}

Json RleToJson(const Rle& rle) {
  Json out = Json::object();
  out[kSize] = Json::array({rle.height, rle.width});
  out[kCounts] = rle.counts;
  return out;
}

Segmentation SegmentationFromJson(const Json& v, const std::string& where) {
  if (v.is_object()) return RleFromJson(v, where);
  if (!v.is_array()) {
    throw ValidationError(where + ": segmentation must be polygons or rle");
  }
  std::vector<Polygon> polys;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Json& p = v[i];
    const std::string pw = where + ".segmentation[" + std::to_string(i) + "]";
    if (!p.is_array()) throw ValidationError(pw + " must be an array");
    Polygon poly;
    poly.reserve(p.size());
    for (const auto& c : p) poly.push_back(GetNumber(c, pw));
    if (poly.size() % 2 != 0 || poly.size() < 6) {
      throw ValidationError(pw + ": polygon needs at least 3 vertices");
    }
    polys.push_back(std::move(poly));
  }
  return polys;
}

Json SegmentationToJson(const Segmentation& seg) {
  if (const auto* rle = std::get_if<Rle>(&seg)) return RleToJson(*rle);
  Json out = Json::array();
  for (const auto& poly : std::get<std::vector<Polygon>>(seg)) {
    out.push_back(poly);
  }
  return out;
}

std::string AnnWhere(std::size_t index, const Json& rec) {
  std::string where = "annotation[" + std::to_string(index) + "]";
  auto it = rec.find(kId);
  if (it != rec.end() && it->is_number_integer()) {
    where += " (id " + std::to_string(it->get<std::int64_t>()) + ")";
  }
  return where;
}

const Json& RequireArray(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) {
    throw ValidationError(std::string("dataset: \"") + key +
                          "\" must be an array");
  }
  return *it;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

}  // namespace

const ImageInfo* Dataset::find_image(std::int64_t id) const {
  for (const auto& img : images) {
    if (img.id == id) return &img;
  }
  return nullptr;
}

const Category* Dataset::find_category(std::int64_t id) const {
  for (const auto& cat : categories) {
    if (cat.id == id) return &cat;
  }
  return nullptr;
}

const Category* Dataset::find_category(std::string_view name) const {
  for (const auto& cat : categories) {
    if (cat.name == name) return &cat;
  }
  return nullptr;
}

BinaryMask decode_segmentation(const Segmentation& seg,
                               const ImageInfo& image) {
  if (const auto* rle = std::get_if<Rle>(&seg)) {
    if (rle->height != image.height || rle->width != image.width) {
      throw ValidationError(
          "rle size " + std::to_string(rle->height) + "x" +
          std::to_string(rle->width) + " does not match image " +
          std::to_string(image.id) + " (" + std::to_string(image.height) +
          "x" + std::to_string(image.width) + ")");
    }
    return rle_decode(*rle);
  }
  return rasterize_polygons(std::get<std::vector<Polygon>>(seg), image.height,
                            image.width);
}

void set_annotation_mask(Annotation& ann, const BinaryMask& mask) {
  ann.segmentation = rle_encode(mask);
  ann.area = static_cast<double>(mask_area(mask));
  ann.bbox = mask_bbox(mask);
}

void validate_dataset(const Dataset& ds) {
  std::vector<std::string> issues;
  std::unordered_map<std::int64_t, const ImageInfo*> images;
  for (const auto& img : ds.images) {
    if (!images.emplace(img.id, &img).second) {
      issues.push_back("duplicate image id " + std::to_string(img.id));
    }
    if (img.width <= 0 || img.height <= 0) {
      issues.push_back("image " + std::to_string(img.id) +
                       " has non-positive dimensions");
    }
  }
  std::unordered_set<std::int64_t> cat_ids;
  std::set<std::string> cat_names;
  for (const auto& cat : ds.categories) {
    if (!cat_ids.insert(cat.id).second) {
      issues.push_back("duplicate category id " + std::to_string(cat.id));
    }
    if (!cat_names.insert(cat.name).second) {
      issues.push_back("duplicate category name \"" + cat.name + "\"");
    }
  }
  std::unordered_set<std::int64_t> ann_ids;
  for (const auto& ann : ds.annotations) {
    const std::string where = "annotation " + std::to_string(ann.id);
    if (!ann_ids.insert(ann.id).second) {
      issues.push_back("duplicate annotation id " + std::to_string(ann.id));
    }
    auto img = images.find(ann.image_id);
    if (img == images.end()) {
      issues.push_back(where + " references unknown image_id " +
                       std::to_string(ann.image_id));
    }
    if (!cat_ids.contains(ann.category_id)) {
      issues.push_back(where + " references unknown category_id " +
                       std::to_string(ann.category_id));
    }
    if (ann.area < 0) issues.push_back(where + " has negative area");
    if (ann.bbox.w < 0 || ann.bbox.h < 0) {
      issues.push_back(where + " has negative bbox extent");
    }
    if (const auto* rle = std::get_if<Rle>(&ann.segmentation)) {
      try {
        validate_rle(*rle);
      } catch (const ValidationError& e) {
        issues.push_back(where + ": " + e.what());
      }
      if (img != images.end() && (rle->height != img->second->height ||
                                  rle->width != img->second->width)) {
        issues.push_back(where + ": rle size does not match image " +
                         std::to_string(ann.image_id));
      }
    } else {
      for (const auto& poly : std::get<std::vector<Polygon>>(ann.segmentation)) {
        if (poly.size() % 2 != 0 || poly.size() < 6) {
          issues.push_back(where + ": polygon needs at least 3 vertices");
        }
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

Dataset dataset_from_json(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("dataset must be a JSON object");
  Dataset ds;
  std::vector<std::string> issues;
  ds.extra = Extras(doc, {kImages, kAnnotations, kCategories});

  const Json& images = RequireArray(doc, kImages);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Json& rec = images[i];
    const std::string where = "image[" + std::to_string(i) + "]";
    try {
      if (!rec.is_object()) throw ValidationError(where + " must be an object");
      ImageInfo img;
      img.id = GetInt(rec, kId, where);
      const auto w = GetInt(rec, kWidth, where);
      const auto h = GetInt(rec, kHeight, where);
      if (w <= 0 || h <= 0 || w > INT32_MAX || h > INT32_MAX) {
        throw ValidationError(where + ": width and height must be positive");
      }
      img.width = static_cast<int>(w);
      img.height = static_cast<int>(h);
      if (auto it = rec.find(kFileName); it != rec.end() && it->is_string()) {
        img.file_name = it->get<std::string>();
      }
      img.extra = Extras(rec, {kId, kWidth, kHeight, kFileName});
      ds.images.push_back(std::move(img));
    } catch (const ValidationError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  }

  const Json& categories = RequireArray(doc, kCategories);
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const Json& rec = categories[i];
    const std::string where = "category[" + std::to_string(i) + "]";
    try {
      if (!rec.is_object()) throw ValidationError(where + " must be an object");
      Category cat;
      cat.id = GetInt(rec, kId, where);
      const Json& name = Field(rec, kName, where);
      if (!name.is_string()) throw ValidationError(where + ": name must be text");
      cat.name = name.get<std::string>();
      cat.extra = Extras(rec, {kId, kName});
      ds.categories.push_back(std::move(cat));
    } catch (const ValidationError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  }

  std::unordered_map<std::int64_t, const ImageInfo*> image_index;
  for (const auto& img : ds.images) image_index.emplace(img.id, &img);

  const Json& annotations = RequireArray(doc, kAnnotations);
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const Json& rec = annotations[i];
    const std::string where = AnnWhere(i, rec);
    try {
      if (!rec.is_object()) throw ValidationError(where + " must be an object");
      Annotation ann;
      ann.id = GetInt(rec, kId, where);
      ann.image_id = GetInt(rec, kImageId, where);
      ann.category_id = GetInt(rec, kCategoryId, where);
      ann.segmentation =
          SegmentationFromJson(Field(rec, kSegmentation, where), where);
      if (auto it = rec.find(kIsCrowd); it != rec.end()) {
        if (it->is_boolean()) {
          ann.iscrowd = it->get<bool>();
        } else if (it->is_number_integer()) {
          ann.iscrowd = it->get<std::int64_t>() != 0;
        } else {
          throw ValidationError(where + ": iscrowd must be 0/1");
        }
      }
      const bool has_area = rec.contains(kArea);
      const bool has_bbox = rec.contains(kBbox);
      if (has_area) ann.area = GetNumber(rec[kArea], where + ".area");
      if (has_bbox) ann.bbox = BoxFromJson(rec[kBbox], where);
      if (!has_area || !has_bbox) {
        auto img = image_index.find(ann.image_id);
        if (img != image_index.end()) {
          const BinaryMask mask =
              decode_segmentation(ann.segmentation, *img->second);
          if (!has_area) ann.area = static_cast<double>(mask_area(mask));
          if (!has_bbox) ann.bbox = mask_bbox(mask);
        }
      }
      ann.extra = Extras(rec, {kId, kImageId, kCategoryId, kSegmentation,
                               kArea, kBbox, kIsCrowd});
      ds.annotations.push_back(std::move(ann));
    } catch (const ValidationError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));
  validate_dataset(ds);
  return ds;
}

Json dataset_to_json(const Dataset& ds) {
  Json doc = Json::object();
  Json images = Json::array();
  for (const auto& img : ds.images) {
    Json rec = Json::object();
    rec[kId] = img.id;
    rec[kWidth] = img.width;
    rec[kHeight] = img.height;
    rec[kFileName] = img.file_name;
    AppendExtras(rec, img.extra);
    images.push_back(std::move(rec));
  }
  Json categories = Json::array();
  for (const auto& cat : ds.categories) {
    Json rec = Json::object();
    rec[kId] = cat.id;
    rec[kName] = cat.name;
    AppendExtras(rec, cat.extra);
    categories.push_back(std::move(rec));
  }
  Json annotations = Json::array();
  for (const auto& ann : ds.annotations) {
    Json rec = Json::object();
    rec[kId] = ann.id;
    rec[kImageId] = ann.image_id;
    rec[kCategoryId] = ann.category_id;
    rec[kSegmentation] = SegmentationToJson(ann.segmentation);
    rec[kArea] = ann.area;
    rec[kBbox] = BoxToJson(ann.bbox);
    rec[kIsCrowd] = ann.iscrowd ? 1 : 0;
    AppendExtras(rec, ann.extra);
    annotations.push_back(std::move(rec));
  }
  doc[kImages] = std::move(images);
  doc[kAnnotations] = std::move(annotations);
  doc[kCategories] = std::move(categories);
  AppendExtras(doc, ds.extra);
  return doc;
}

Dataset parse_dataset_text(std::string_view text) {
  return dataset_from_json(parse_json_text(text));
}

Dataset parse_dataset(const std::filesystem::path& path) {
  return parse_dataset_text(ReadFile(path));
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_json_file(dataset_to_json(dataset), path);
}

std::vector<Detection> results_from_json(const Json& doc,
                                         const Dataset* dataset) {
  if (!doc.is_array()) throw ValidationError("results must be a JSON array");
  std::unordered_map<std::int64_t, const ImageInfo*> image_index;
  std::unordered_set<std::int64_t> cat_ids;
  if (dataset != nullptr) {
    for (const auto& img : dataset->images) image_index.emplace(img.id, &img);
    for (const auto& cat : dataset->categories) cat_ids.insert(cat.id);
  }

  std::vector<Detection> dets;
  dets.reserve(doc.size());
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& rec = doc[i];
    const std::string where = "result[" + std::to_string(i) + "]";
    try {
      if (!rec.is_object()) throw ValidationError(where + " must be an object");
      Detection det;
      det.image_id = GetInt(rec, kImageId, where);
      det.category_id = GetInt(rec, kCategoryId, where);
      det.score = GetNumber(Field(rec, kScore, where), where + ".score");
      if (!(det.score >= 0.0 && det.score <= 1.0)) {
        throw ValidationError(where + ": score " + std::to_string(det.score) +
                              " outside [0, 1]");
      }
      const Json& seg = Field(rec, kSegmentation, where);
      if (!seg.is_object()) {
        throw ValidationError(where + ": segmentation must be an rle object");
      }
      det.segmentation = RleFromJson(seg, where);
      if (dataset != nullptr) {
        auto img = image_index.find(det.image_id);
        if (img == image_index.end()) {
          throw ValidationError(where + " references unknown image_id " +
                                std::to_string(det.image_id));
        }
        if (!cat_ids.contains(det.category_id)) {
          throw ValidationError(where + " references unknown category_id " +
                                std::to_string(det.category_id));
        }
        if (det.segmentation.height != img->second->height ||
            det.segmentation.width != img->second->width) {
          throw ValidationError(
              where + ": rle size " + std::to_string(det.segmentation.height) +
              "x" + std::to_string(det.segmentation.width) +
              " does not match image " + std::to_string(det.image_id) + " (" +
              std::to_string(img->second->height) + "x" +
              std::to_string(img->second->width) + ")");
        }
      }
      if (auto it = rec.find(kBbox); it != rec.end()) {
        det.bbox = BoxFromJson(*it, where);
      } else {
        det.bbox = mask_bbox(rle_decode(det.segmentation));
      }
      det.extra =
          Extras(rec, {kImageId, kCategoryId, kScore, kSegmentation, kBbox});
      dets.push_back(std::move(det));
    } catch (const ValidationError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return dets;
}

Json results_to_json(std::span<const Detection> dets) {
  Json out = Json::array();
  for (const auto& det : dets) {
    Json rec = Json::object();
    rec[kImageId] = det.image_id;
    rec[kCategoryId] = det.category_id;
    rec[kScore] = det.score;
    rec[kSegmentation] = RleToJson(det.segmentation);
    rec[kBbox] = BoxToJson(det.bbox);
    AppendExtras(rec, det.extra);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<Detection> parse_results_text(std::string_view text,
                                          const Dataset* dataset) {
  return results_from_json(parse_json_text(text), dataset);
}

std::vector<Detection> parse_results(const std::filesystem::path& path,
                                     const Dataset& dataset) {
  return parse_results_text(ReadFile(path), &dataset);
}

std::vector<Detection> parse_results(const std::filesystem::path& path) {
  return parse_results_text(ReadFile(path), nullptr);
}

void write_results(std::span<const Detection> dets,
                   const std::filesystem::path& path) {
  write_json_file(results_to_json(dets), path);
}

Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json_text(ReadFile(path));
}

void write_json_file(const Json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump() << '\n';
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace segkit
