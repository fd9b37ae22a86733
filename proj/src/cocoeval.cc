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

#include "segkit/cocoeval.h"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "segkit/errors.h"
#include "segkit/parallel.h"

namespace segkit {

namespace {

// One ranked detection of an (image, category) cell, kept for pooling.
struct Scored {
  double score;
  std::int64_t image_id;
  std::size_t input_index;
  bool tp;
};

struct CellResult {
  std::size_t num_gt = 0;
  std::vector<std::vector<Scored>> per_threshold;
};

std::vector<std::size_t> RankDetections(std::span<const double> scores,
                                        int max_dets) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  if (max_dets >= 0 && order.size() > static_cast<std::size_t>(max_dets)) {
    order.resize(static_cast<std::size_t>(max_dets));
  }
  return order;
}

IouMatrix ComputeIous(std::span<const IndexedMask> det_masks,
                      std::span<const Box> det_boxes,
                      std::span<const IndexedMask> gt_masks,
                      std::span<const Box> gt_boxes, IouKind kind) {
  IouMatrix m;
  m.rows = kind == IouKind::kMask ? det_masks.size() : det_boxes.size();
  m.cols = kind == IouKind::kMask ? gt_masks.size() : gt_boxes.size();
  m.values.resize(m.rows * m.cols);
  for (std::size_t d = 0; d < m.rows; ++d) {
    for (std::size_t g = 0; g < m.cols; ++g) {
      m.values[d * m.cols + g] = kind == IouKind::kMask
                                     ? mask_iou(det_masks[d], gt_masks[g])
                                     : bbox_iou(det_boxes[d], gt_boxes[g]);
    }
  }
  return m;
}

std::string Fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::vector<double> default_iou_thresholds() {
  return {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
}

std::vector<double> default_recall_points() {
  std::vector<double> points(101);
  for (int i = 0; i <= 100; ++i) points[i] = i / 100.0;
  return points;
}

void validate_eval_params(const EvalParams& params) {
  std::vector<std::string> issues;
  if (params.iou_thresholds.empty()) issues.push_back("no IoU thresholds");
  for (std::size_t i = 0; i < params.iou_thresholds.size(); ++i) {
    const double t = params.iou_thresholds[i];
    if (!(t >= 0 && t <= 1)) issues.push_back("IoU threshold outside [0, 1]");
    if (i > 0 && !(t > params.iou_thresholds[i - 1])) {
      issues.push_back("IoU thresholds must be strictly increasing");
    }
  }
  if (params.recall_points.empty()) issues.push_back("no recall points");
  if (params.max_dets_per_image < 0) {
    issues.push_back("max detections per image must be non-negative");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

MatchResult greedy_match(std::span<const double> det_scores,
                         const IouMatrix& ious, double iou_threshold,
                         int max_dets) {
  MatchResult result;
  result.det_order = RankDetections(det_scores, max_dets);
  std::vector<bool> gt_taken(ious.cols, false);
  for (std::size_t d : result.det_order) {
    std::optional<std::size_t> best;
    double best_iou = iou_threshold;
    for (std::size_t g = 0; g < ious.cols; ++g) {
      if (gt_taken[g]) continue;
      const double v = ious.at(d, g);
      if (v < iou_threshold) continue;
      if (!best || v > best_iou) {
        best = g;
        best_iou = v;
      }
    }
    if (best) gt_taken[*best] = true;
    result.is_tp.push_back(best.has_value());
    result.matched_gt.push_back(best);
  }
  result.unmatched_gt = static_cast<std::size_t>(
      std::count(gt_taken.begin(), gt_taken.end(), false));
  return result;
}

MatchResult match_image_category(std::span<const Annotation> gts,
                                 std::span<const Detection> dets,
                                 const ImageInfo& image, double iou_threshold,
                                 int max_dets, IouKind iou_kind) {
  std::vector<IndexedMask> gt_masks, det_masks;
  std::vector<Box> gt_boxes, det_boxes;
  for (const auto& g : gts) {
    if (g.iscrowd) continue;
    if (iou_kind == IouKind::kMask) {
      gt_masks.emplace_back(decode_segmentation(g.segmentation, image));
    }
    gt_boxes.push_back(g.bbox);
  }
  std::vector<double> scores;
  for (const auto& d : dets) {
    if (iou_kind == IouKind::kMask) {
      det_masks.emplace_back(decode_segmentation(d.segmentation, image));
    }
    det_boxes.push_back(d.bbox);
    scores.push_back(d.score);
  }
  const IouMatrix ious =
      ComputeIous(det_masks, det_boxes, gt_masks, gt_boxes, iou_kind);
  return greedy_match(scores, ious, iou_threshold, max_dets);
}

std::optional<double> average_precision_101(
    std::span<const bool> tp, std::size_t num_gt,
    std::span<const double> recall_points) {
  if (num_gt == 0) return std::nullopt;
  const std::size_t n = tp.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tp[i]) ++tp_count;
    precision[i] = static_cast<double>(tp_count) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp_count) / static_cast<double>(num_gt);
  }
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0;
  for (double r : recall_points) {
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[it - recall.begin()];
  }
  return sum / static_cast<double>(recall_points.size());
}

EvalReport evaluate_map(const Dataset& gt, std::span<const Detection> dets,
                        const EvalParams& params, int jobs) {
  validate_eval_params(params);
  std::unordered_map<std::int64_t, const ImageInfo*> images;
  for (const auto& img : gt.images) images.emplace(img.id, &img);

  std::vector<std::string> issues;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Detection& d = dets[i];
    auto img = images.find(d.image_id);
    if (img == images.end()) {
      issues.push_back("detection " + std::to_string(i) +
                       " references unknown image_id " +
                       std::to_string(d.image_id));
    } else if (params.iou_kind == IouKind::kMask &&
               (d.segmentation.height != img->second->height ||
                d.segmentation.width != img->second->width)) {
      issues.push_back("detection " + std::to_string(i) +
                       " has a mask sized differently from image " +
                       std::to_string(d.image_id));
    }
    if (gt.find_category(d.category_id) == nullptr) {
      issues.push_back("detection " + std::to_string(i) +
                       " references unknown category_id " +
                       std::to_string(d.category_id));
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  using Key = std::pair<std::int64_t, std::int64_t>;  // (image, category)
  struct Cell {
    std::vector<const Annotation*> gts;
    std::vector<std::size_t> dets;
  };
  std::map<Key, Cell> cells;
  for (const auto& ann : gt.annotations) {
    if (ann.iscrowd) continue;
    cells[{ann.image_id, ann.category_id}].gts.push_back(&ann);
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    cells[{dets[i].image_id, dets[i].category_id}].dets.push_back(i);
  }

  std::vector<std::pair<const Key*, const Cell*>> tasks;
  tasks.reserve(cells.size());
  for (const auto& [key, cell] : cells) tasks.emplace_back(&key, &cell);
  std::vector<CellResult> results(tasks.size());

  parallel_for(tasks.size(), jobs, [&](std::size_t t) {
    const Key& key = *tasks[t].first;
    const Cell& cell = *tasks[t].second;
    const ImageInfo& image = *images.at(key.first);
    std::vector<IndexedMask> gt_masks, det_masks;
    std::vector<Box> gt_boxes, det_boxes;
    std::vector<double> scores;
    for (const Annotation* g : cell.gts) {
      if (params.iou_kind == IouKind::kMask) {
        gt_masks.emplace_back(decode_segmentation(g->segmentation, image));
      }
      gt_boxes.push_back(g->bbox);
    }
    for (std::size_t i : cell.dets) {
      if (params.iou_kind == IouKind::kMask) {
        det_masks.emplace_back(rle_decode(dets[i].segmentation));
      }
      det_boxes.push_back(dets[i].bbox);
      scores.push_back(dets[i].score);
    }
    const IouMatrix ious =
        ComputeIous(det_masks, det_boxes, gt_masks, gt_boxes, params.iou_kind);

    CellResult& out = results[t];
    out.num_gt = cell.gts.size();
    out.per_threshold.resize(params.iou_thresholds.size());
    for (std::size_t k = 0; k < params.iou_thresholds.size(); ++k) {
      const MatchResult m = greedy_match(scores, ious, params.iou_thresholds[k],
                                         params.max_dets_per_image);
      for (std::size_t r = 0; r < m.det_order.size(); ++r) {
        const std::size_t local = m.det_order[r];
        out.per_threshold[k].push_back(
            {scores[local], key.first, cell.dets[local], m.is_tp[r]});
      }
    }
  });

  EvalReport report;
  for (const auto& cat : gt.categories) {
    CategoryEval ce;
    ce.category_id = cat.id;
    ce.name = cat.name;
    report.per_category.emplace(cat.id, std::move(ce));
  }
  std::map<std::int64_t, std::vector<std::vector<Scored>>> pooled;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const std::int64_t cat_id = tasks[t].first->second;
    report.per_category[cat_id].num_gt += results[t].num_gt;
    auto& pool = pooled[cat_id];
    pool.resize(params.iou_thresholds.size());
    for (std::size_t k = 0; k < pool.size(); ++k) {
      pool[k].insert(pool[k].end(), results[t].per_threshold[k].begin(),
                     results[t].per_threshold[k].end());
    }
  }

  double sum = 0;
  for (auto& [cat_id, ce] : report.per_category) {
    if (ce.num_gt == 0) continue;
    ce.absent = false;
    auto& pool = pooled[cat_id];
    pool.resize(params.iou_thresholds.size());
    double cat_sum = 0;
    for (auto& ranked : pool) {
      std::sort(ranked.begin(), ranked.end(),
                [](const Scored& a, const Scored& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return std::tie(a.image_id, a.input_index) <
                         std::tie(b.image_id, b.input_index);
                });
      auto labels = std::make_unique<bool[]>(ranked.size());
      for (std::size_t i = 0; i < ranked.size(); ++i) labels[i] = ranked[i].tp;
      const double ap = *average_precision_101(
          std::span<const bool>(labels.get(), ranked.size()), ce.num_gt,
          params.recall_points);
      ce.ap_per_threshold.push_back(ap);
      cat_sum += ap;
    }
    ce.ap = cat_sum / static_cast<double>(ce.ap_per_threshold.size());
    sum += ce.ap;
    ++report.evaluated_categories;
  }
  report.mean_ap = report.evaluated_categories == 0
                       ? 0.0
                       : sum / static_cast<double>(report.evaluated_categories);
  return report;
}

Json report_to_json(const EvalReport& report, const EvalParams& params) {
  Json doc = Json::object();
  doc["metric"] = "AP@[0.50:0.95]";
  doc["iou_kind"] = params.iou_kind == IouKind::kMask ? "mask" : "bbox";
  doc["iou_thresholds"] = params.iou_thresholds;
  doc["max_dets_per_image"] = params.max_dets_per_image;
  doc["mean_ap"] = report.mean_ap;
  doc["evaluated_categories"] = report.evaluated_categories;
  Json cats = Json::array();
  for (const auto& [id, ce] : report.per_category) {
    Json rec = Json::object();
    rec["category_id"] = id;
    rec["name"] = ce.name;
    rec["num_gt"] = ce.num_gt;
    rec["absent"] = ce.absent;
    if (ce.absent) {
      rec["ap"] = nullptr;
      rec["ap_per_threshold"] = nullptr;
    } else {
      rec["ap"] = ce.ap;
      rec["ap_per_threshold"] = ce.ap_per_threshold;
    }
    cats.push_back(std::move(rec));
  }
  doc["categories"] = std::move(cats);
  return doc;
}

std::string format_report_table(const EvalReport& report) {
  std::size_t name_width = 8;
  for (const auto& [id, ce] : report.per_category) {
    name_width = std::max(name_width, ce.name.size());
  }
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out = pad("id", 8) + pad("category", name_width + 2) +
                    pad("num_gt", 8) + "AP\n";
  for (const auto& [id, ce] : report.per_category) {
    out += pad(std::to_string(id), 8) + pad(ce.name, name_width + 2) +
           pad(std::to_string(ce.num_gt), 8) +
           (ce.absent ? std::string("absent") : Fixed4(ce.ap)) + "\n";
  }
  out += "mean AP " + Fixed4(report.mean_ap) + "\n";
  return out;
}

}  // namespace segkit
