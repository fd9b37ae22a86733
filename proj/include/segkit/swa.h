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

// Stochastic weight averaging over checkpoint snapshots, plus the cyclic
// learning-rate schedule used while collecting them.
//
// On-disk snapshot format is a directory holding
//   manifest.json  {"format": "segkit-snapshot", "dtype": "float64",
//                   "tensors": [{"name", "shape", "offset", "count"}...],
//                   "meta": {...}}
//   weights.bin    little-endian float64 values, tensors in manifest order
// A single JSON file {"tensors": [{"name", "shape", "values"}...],
// "meta": {...}} is accepted and written as well.
//
// Averaging does not refresh batch-norm statistics; models with BN layers
// need a forward pass over training data after averaging.

#ifndef SEGKIT_SWA_H_
#define SEGKIT_SWA_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "segkit/coco_model.h"

namespace segkit {

// Learning rate of the first (SGD) training stage.
inline constexpr double kStage1SgdLr = 0.02;
// Initial AdamW learning rate of the SWA fine-tune stage.
inline constexpr double kSwaAdamwLr = 0.0001;

struct Tensor {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<double> values;

  bool operator==(const Tensor&) const = default;
};

struct WeightSnapshot {
  std::vector<Tensor> tensors;  // manifest order
  Json meta = Json::object();

  const Tensor* find(const std::string& name) const;
  bool operator==(const WeightSnapshot&) const = default;
};

// Throws ValidationError if any tensor's value count differs from the
// product of its shape or a name repeats.
void validate_snapshot(const WeightSnapshot& snap);

// Element-wise mean. Snapshots must agree on tensor names and shapes; the
// output follows the first snapshot's tensor order and records
// meta["count"]. Each element's values are combined in sorted order with a
// running mean, which makes the result independent of snapshot order and
// exact for identical inputs.
WeightSnapshot average_snapshots(std::span<const WeightSnapshot> snaps,
                                 int jobs = 1);

// Reads a snapshot directory or a single JSON snapshot file.
WeightSnapshot read_snapshot(const std::filesystem::path& path);
// Writes the directory form, or the JSON form when `path` ends in ".json".
void write_snapshot(const WeightSnapshot& snap,
                    const std::filesystem::path& path);

struct LrSchedule {
  std::vector<double> values;  // one per optimizer step
};

// Linear decay from lr_start to lr_end over each cycle, restarting at
// lr_start; one snapshot is meant to be taken at every cycle end.
LrSchedule cyclic_lr_schedule(double lr_start, double lr_end,
                              int steps_per_cycle, int cycles);

}  // namespace segkit

#endif  // SEGKIT_SWA_H_
