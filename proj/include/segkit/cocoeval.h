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

// COCO-style average precision over the IoU grid 0.50:0.05:0.95, with
// 101-point interpolated precision and at most 100 detections per image and
// category.
//
// Crowd ground truths are left out of matching and of the ground-truth
// count; detections landing on them count as false positives. Area-range
// breakdowns and recall metrics are not computed.

#ifndef SEGKIT_COCOEVAL_H_
#define SEGKIT_COCOEVAL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segkit/coco_model.h"
#include "segkit/soft_nms.h"

namespace segkit {

std::vector<double> default_iou_thresholds();
std::vector<double> default_recall_points();

struct EvalParams {
  std::vector<double> iou_thresholds = default_iou_thresholds();
  std::vector<double> recall_points = default_recall_points();
  int max_dets_per_image = 100;
  IouKind iou_kind = IouKind::kMask;
};

void validate_eval_params(const EvalParams& params);

struct CategoryEval {
  std::int64_t category_id = 0;
  std::string name;
  std::size_t num_gt = 0;
  // No non-crowd ground truth: excluded from the mean, per-threshold AP empty.
  bool absent = true;
  std::vector<double> ap_per_threshold;
  double ap = 0;
};

struct EvalReport {
  std::map<std::int64_t, CategoryEval> per_category;
  // Mean over non-absent categories; 0 when there are none.
  double mean_ap = 0;
  std::size_t evaluated_categories = 0;
};

// Dense IoU table, rows = detections, columns = ground truths.
struct IouMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t det, std::size_t gt) const {
    return values[det * cols + gt];
  }
};

struct MatchResult {
  // Detection indices in ranked order (score desc, index asc), truncated.
  std::vector<std::size_t> det_order;
  // Parallel to det_order.
  std::vector<bool> is_tp;
  std::vector<std::optional<std::size_t>> matched_gt;
  std::size_t unmatched_gt = 0;
};

// Greedy matching: each ranked detection takes the unmatched ground truth
// with the highest IoU (first one on ties) if that IoU reaches the threshold.
MatchResult greedy_match(std::span<const double> det_scores,
                         const IouMatrix& ious, double iou_threshold,
                         int max_dets);

// Convenience form over raw records of one image and one category. Crowd
// ground truths are skipped.
MatchResult match_image_category(std::span<const Annotation> gts,
                                 std::span<const Detection> dets,
                                 const ImageInfo& image, double iou_threshold,
                                 int max_dets,
                                 IouKind iou_kind = IouKind::kMask);

// `tp` lists labels in score order. Returns nullopt when num_gt == 0.
std::optional<double> average_precision_101(
    std::span<const bool> tp, std::size_t num_gt,
    std::span<const double> recall_points = default_recall_points());

// Detections must reference images and categories of `gt`; `jobs` > 1
// parallelizes per-(image, category) matching with identical results.
EvalReport evaluate_map(const Dataset& gt, std::span<const Detection> dets,
                        const EvalParams& params = {}, int jobs = 1);

Json report_to_json(const EvalReport& report, const EvalParams& params);
// Human-readable table ending in a "mean AP" line.
std::string format_report_table(const EvalReport& report);

}  // namespace segkit

#endif  // SEGKIT_COCOEVAL_H_
