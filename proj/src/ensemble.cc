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

#include "segkit/ensemble.h"

#include <algorithm>
#include <charconv>
#include <string>

#include "segkit/errors.h"

namespace segkit {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

Source ParseSource(std::string_view s) {
  if (s == "A" || s == "a") return Source::kA;
  if (s == "B" || s == "b") return Source::kB;
  throw ValidationError("routing source must be A or B, got \"" +
                        std::string(s) + "\"");
}

EnsembleMode ParseMode(std::string_view s) {
  if (s == "route") return EnsembleMode::kRoute;
  if (s == "merge") return EnsembleMode::kMerge;
  throw ValidationError("ensemble mode must be route or merge, got \"" +
                        std::string(s) + "\"");
}

std::int64_t ResolveCategory(std::string_view key, const Dataset& dataset) {
  if (const Category* cat = dataset.find_category(key)) return cat->id;
  std::int64_t id = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
  if (ec == std::errc() && ptr == key.data() + key.size() &&
      dataset.find_category(id) != nullptr) {
    return id;
  }
  throw ValidationError("routing names unknown category \"" +
                        std::string(key) + "\"");
}

}  // namespace

Source RoutingTable::source_for(std::int64_t category_id) const {
  auto it = overrides.find(category_id);
  return it == overrides.end() ? default_source : it->second;
}

RoutingTable parse_routing(std::string_view spec, const Dataset& dataset) {
  RoutingTable table;
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    const std::string_view item = Trim(spec.substr(0, comma));
    spec = comma == std::string_view::npos ? std::string_view{}
                                           : spec.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("routing entry \"" + std::string(item) +
                            "\" is not key=value");
    }
    const std::string_view key = Trim(item.substr(0, eq));
    const std::string_view value = Trim(item.substr(eq + 1));
    if (key == "default") {
      table.default_source = ParseSource(value);
    } else if (key == "mode") {
      table.mode = ParseMode(value);
    } else {
      table.overrides[ResolveCategory(key, dataset)] = ParseSource(value);
    }
  }
  return table;
}

RoutingTable routing_from_json(const Json& doc, const Dataset& dataset) {
  if (!doc.is_object()) throw ValidationError("routing config must be an object");
  RoutingTable table;
  if (auto it = doc.find("default"); it != doc.end()) {
    if (!it->is_string()) throw ValidationError("routing default must be text");
    table.default_source = ParseSource(it->get<std::string>());
  }
  if (auto it = doc.find("mode"); it != doc.end()) {
    if (!it->is_string()) throw ValidationError("routing mode must be text");
    table.mode = ParseMode(it->get<std::string>());
  }
  if (auto it = doc.find("overrides"); it != doc.end()) {
    if (!it->is_object()) {
      throw ValidationError("routing overrides must be an object");
    }
    for (auto o = it->begin(); o != it->end(); ++o) {
      if (!o.value().is_string()) {
        throw ValidationError("routing override values must be \"A\" or \"B\"");
      }
      table.overrides[ResolveCategory(o.key(), dataset)] =
          ParseSource(o.value().get<std::string>());
    }
  }
  return table;
}

std::vector<Detection> integrate_by_category(
    std::span<const Detection> a, std::span<const Detection> b,
    const RoutingTable& routing, std::span<const Category> categories,
    const NmsParams& nms, int jobs) {
  for (const auto& [cat_id, source] : routing.overrides) {
    const bool known =
        std::any_of(categories.begin(), categories.end(),
                    [id = cat_id](const Category& c) { return c.id == id; });
    if (!known) {
      throw ValidationError("routing override for unknown category " +
                            std::to_string(cat_id));
    }
  }

  if (routing.mode == EnsembleMode::kMerge) {
    std::vector<Detection> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    return soft_nms_grouped(all, nms, jobs);
  }

  std::vector<Detection> out;
  for (const auto& d : a) {
    if (routing.source_for(d.category_id) == Source::kA) out.push_back(d);
  }
  for (const auto& d : b) {
    if (routing.source_for(d.category_id) == Source::kB) out.push_back(d);
  }
  return out;
}

}  // namespace segkit
