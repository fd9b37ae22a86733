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

#include "segkit/swa.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>

#include "segkit/errors.h"
#include "segkit/parallel.h"

namespace segkit {

namespace {

constexpr char kManifest[] = "manifest.json";
constexpr char kWeights[] = "weights.bin";
constexpr char kFormat[] = "segkit-snapshot";

std::int64_t ShapeProduct(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

// IEEE-754 totalOrder as a signed integer key.
std::int64_t TotalOrderKey(double v) {
  auto bits = std::bit_cast<std::int64_t>(v);
  if (bits < 0) bits ^= INT64_MAX;
  return bits;
}

std::vector<std::int64_t> ShapeFromJson(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": shape must be an array");
  std::vector<std::int64_t> shape;
  for (const auto& d : v) {
    if (!d.is_number_integer() || d.get<std::int64_t>() < 0) {
      throw ValidationError(where + ": shape entries must be non-negative");
    }
    shape.push_back(d.get<std::int64_t>());
  }
  return shape;
}

Tensor TensorFromJson(std::string name, const Json& rec) {
  const std::string where = "tensor \"" + name + "\"";
  if (!rec.is_object() || !rec.contains("shape") || !rec.contains("values")) {
    throw ValidationError(where + " needs shape and values");
  }
  Tensor t;
  t.name = std::move(name);
  t.shape = ShapeFromJson(rec["shape"], where);
  const Json& values = rec["values"];
  if (!values.is_array()) throw ValidationError(where + ": values must be an array");
  t.values.reserve(values.size());
  for (const auto& v : values) {
    if (!v.is_number()) throw ValidationError(where + ": values must be numbers");
    t.values.push_back(v.get<double>());
  }
  return t;
}

WeightSnapshot ReadJsonSnapshot(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  if (!doc.is_object() || !doc.contains("tensors")) {
    throw ValidationError(path.string() + ": snapshot needs \"tensors\"");
  }
  WeightSnapshot snap;
  const Json& tensors = doc["tensors"];
  if (tensors.is_array()) {
    for (const auto& rec : tensors) {
      if (!rec.is_object() || !rec.contains("name") || !rec["name"].is_string()) {
        throw ValidationError(path.string() + ": tensor entry needs a name");
      }
      snap.tensors.push_back(TensorFromJson(rec["name"].get<std::string>(), rec));
    }
  } else if (tensors.is_object()) {
    for (auto it = tensors.begin(); it != tensors.end(); ++it) {
      snap.tensors.push_back(TensorFromJson(it.key(), it.value()));
    }
  } else {
    throw ValidationError(path.string() + ": \"tensors\" must be a list or map");
  }
  if (auto it = doc.find("meta"); it != doc.end() && it->is_object()) {
    snap.meta = *it;
  }
  return snap;
}

WeightSnapshot ReadDirSnapshot(const std::filesystem::path& dir) {
  const Json manifest = read_json_file(dir / kManifest);
  if (!manifest.is_object() || !manifest.contains("tensors") ||
      !manifest["tensors"].is_array()) {
    throw ValidationError((dir / kManifest).string() +
                          ": manifest needs a \"tensors\" list");
  }
  if (auto it = manifest.find("dtype");
      it != manifest.end() && *it != "float64") {
    throw ValidationError((dir / kManifest).string() +
                          ": only float64 weights are supported");
  }
  std::ifstream in(dir / kWeights, std::ios::binary);
  if (!in) throw IoError("cannot open " + (dir / kWeights).string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  WeightSnapshot snap;
  for (const auto& rec : manifest["tensors"]) {
    if (!rec.is_object() || !rec.contains("name") || !rec["name"].is_string() ||
        !rec.contains("offset") || !rec["offset"].is_number_integer()) {
      throw ValidationError("manifest tensor entry needs name and offset");
    }
    Tensor t;
    t.name = rec["name"].get<std::string>();
    t.shape = ShapeFromJson(rec["shape"], "tensor \"" + t.name + "\"");
    const auto count = static_cast<std::uint64_t>(ShapeProduct(t.shape));
    const auto offset = rec["offset"].get<std::uint64_t>();
    if (offset % 8 != 0 || offset + count * 8 > bytes.size()) {
      throw ValidationError("tensor \"" + t.name +
                            "\" lies outside weights.bin");
    }
    t.values.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      std::uint64_t raw = 0;
      for (int b = 0; b < 8; ++b) {
        raw |= static_cast<std::uint64_t>(bytes[offset + i * 8 + b]) << (8 * b);
      }
      t.values[i] = std::bit_cast<double>(raw);
    }
    snap.tensors.push_back(std::move(t));
  }
  if (auto it = manifest.find("meta"); it != manifest.end() && it->is_object()) {
    snap.meta = *it;
  }
  return snap;
}

}  // namespace

const Tensor* WeightSnapshot::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void validate_snapshot(const WeightSnapshot& snap) {
  std::vector<std::string> issues;
  std::set<std::string> names;
  for (const auto& t : snap.tensors) {
    if (!names.insert(t.name).second) {
      issues.push_back("duplicate tensor \"" + t.name + "\"");
    }
    if (ShapeProduct(t.shape) != static_cast<std::int64_t>(t.values.size())) {
      issues.push_back("tensor \"" + t.name + "\" has " +
                       std::to_string(t.values.size()) +
                       " values but its shape holds " +
                       std::to_string(ShapeProduct(t.shape)));
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

WeightSnapshot average_snapshots(std::span<const WeightSnapshot> snaps,
                                 int jobs) {
  if (snaps.empty()) throw ValidationError("no snapshots to average");
  for (const auto& s : snaps) validate_snapshot(s);
  const WeightSnapshot& first = snaps.front();

  // Resolve every snapshot's tensors in the first snapshot's order.
  std::vector<std::vector<const Tensor*>> columns(first.tensors.size());
  for (std::size_t t = 0; t < first.tensors.size(); ++t) {
    const Tensor& ref = first.tensors[t];
    for (std::size_t s = 0; s < snaps.size(); ++s) {
      const Tensor* other = snaps[s].find(ref.name);
      if (other == nullptr) {
        throw ValidationError("snapshot " + std::to_string(s) +
                              " lacks tensor \"" + ref.name + "\"");
      }
      if (other->shape != ref.shape) {
        throw ValidationError("tensor \"" + ref.name +
                              "\" has a different shape in snapshot " +
                              std::to_string(s));
      }
      columns[t].push_back(other);
    }
  }
  for (std::size_t s = 1; s < snaps.size(); ++s) {
    if (snaps[s].tensors.size() != first.tensors.size()) {
      for (const auto& t : snaps[s].tensors) {
        if (first.find(t.name) == nullptr) {
          throw ValidationError("tensor \"" + t.name + "\" appears only in snapshot " +
                                std::to_string(s));
        }
      }
    }
  }

  WeightSnapshot out;
  out.tensors.resize(first.tensors.size());
  parallel_for(first.tensors.size(), jobs, [&](std::size_t t) {
    Tensor& dst = out.tensors[t];
    dst.name = first.tensors[t].name;
    dst.shape = first.tensors[t].shape;
    dst.values.resize(first.tensors[t].values.size());
    std::vector<double> column(snaps.size());
    for (std::size_t i = 0; i < dst.values.size(); ++i) {
      for (std::size_t s = 0; s < snaps.size(); ++s) {
        column[s] = columns[t][s]->values[i];
      }
      std::sort(column.begin(), column.end(), [](double a, double b) {
        return TotalOrderKey(a) < TotalOrderKey(b);
      });
      double mean = column[0];
      for (std::size_t s = 1; s < column.size(); ++s) {
        mean += (column[s] - mean) / static_cast<double>(s + 1);
      }
      dst.values[i] = mean;
    }
  });
  out.meta["count"] = snaps.size();
  return out;
}

WeightSnapshot read_snapshot(const std::filesystem::path& path) {
  WeightSnapshot snap = std::filesystem::is_directory(path)
                            ? ReadDirSnapshot(path)
                            : ReadJsonSnapshot(path);
  validate_snapshot(snap);
  return snap;
}

void write_snapshot(const WeightSnapshot& snap,
                    const std::filesystem::path& path) {
  validate_snapshot(snap);
  if (path.extension() == ".json") {
    Json doc = Json::object();
    Json tensors = Json::array();
    for (const auto& t : snap.tensors) {
      Json rec = Json::object();
      rec["name"] = t.name;
      rec["shape"] = t.shape;
      rec["values"] = t.values;
      tensors.push_back(std::move(rec));
    }
    doc["tensors"] = std::move(tensors);
    doc["meta"] = snap.meta;
    write_json_file(doc, path);
    return;
  }

  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create " + path.string() + ": " + ec.message());
  Json manifest = Json::object();
  manifest["format"] = kFormat;
  manifest["dtype"] = "float64";
  Json entries = Json::array();
  std::ofstream bin(path / kWeights, std::ios::binary | std::ios::trunc);
  if (!bin) throw IoError("cannot open " + (path / kWeights).string());
  std::uint64_t offset = 0;
  for (const auto& t : snap.tensors) {
    Json rec = Json::object();
    rec["name"] = t.name;
    rec["shape"] = t.shape;
    rec["offset"] = offset;
    rec["count"] = t.values.size();
    entries.push_back(std::move(rec));
    for (double v : t.values) {
      const auto raw = std::bit_cast<std::uint64_t>(v);
      char le[8];
      for (int b = 0; b < 8; ++b) le[b] = static_cast<char>((raw >> (8 * b)) & 0xff);
      bin.write(le, 8);
    }
    offset += t.values.size() * 8;
  }
  bin.flush();
  if (!bin) throw IoError("failed writing " + (path / kWeights).string());
  manifest["tensors"] = std::move(entries);
  manifest["meta"] = snap.meta;
  write_json_file(manifest, path / kManifest);
}

LrSchedule cyclic_lr_schedule(double lr_start, double lr_end,
                              int steps_per_cycle, int cycles) {
  if (steps_per_cycle < 2) {
    throw ValidationError("steps per cycle must be at least 2");
  }
  if (cycles < 1) throw ValidationError("cycles must be positive");
  if (!(lr_start > 0)) throw ValidationError("lr_start must be positive");
  if (!(lr_end >= 0)) throw ValidationError("lr_end must be non-negative");
  if (lr_start < lr_end) throw ValidationError("lr_start must be >= lr_end");
  LrSchedule schedule;
  schedule.values.reserve(static_cast<std::size_t>(steps_per_cycle) * cycles);
  for (int c = 0; c < cycles; ++c) {
    for (int i = 0; i < steps_per_cycle; ++i) {
      const double t = static_cast<double>(i) / (steps_per_cycle - 1);
      schedule.values.push_back(std::lerp(lr_start, lr_end, t));
    }
  }
  return schedule;
}

}  // namespace segkit
