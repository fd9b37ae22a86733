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

#include "cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "segkit/coco_model.h"
#include "segkit/cocoeval.h"
#include "segkit/copypaste.h"
#include "segkit/ensemble.h"
#include "segkit/errors.h"
#include "segkit/image.h"
#include "segkit/soft_nms.h"
#include "segkit/swa.h"
#include "segkit/tta.h"

namespace segkit::cli {

namespace {

namespace fs = std::filesystem;

// Reads `--config file.json`: a flat object of flag names (without dashes)
// to values. Command-line flags take precedence over the file.
// Flat JSON object of flag values. Keys are routed to the subcommand that
// was selected on the command line.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool,
                        std::string) const override {
    Json doc = Json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string& name = opt->get_lnames().front();
      if (name == "help" || name == "version" || name == "config") continue;
      std::vector<std::string> values = opt->reduced_results();
      if (values.empty() && default_also && !opt->get_default_str().empty()) {
        values.push_back(opt->get_default_str());
      }
      if (values.size() == 1) {
        doc[name] = values.front();
      } else if (!values.empty()) {
        doc[name] = values;
      }
    }
    return doc.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    Json doc;
    try {
      doc = Json::parse(input);
    } catch (const Json::parse_error& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config must be an object");
    std::vector<CLI::ConfigItem> items;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      CLI::ConfigItem item;
      item.name = it.key();
      for (const CLI::App* sub : root_->get_subcommands()) {
        item.parents.push_back(sub->get_name());
      }
      if (it->is_array()) {
        for (const auto& v : *it) item.inputs.push_back(Scalar(v));
      } else {
        item.inputs.push_back(Scalar(*it));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* root_;

  static std::string Scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }
};

struct NmsFlags {
  std::string method = "gaussian";
  double sigma = 0.5;
  double iou_threshold = 0.5;
  double score_floor = 0.001;
  std::string iou = "mask";

  NmsParams params() const {
    NmsParams p;
    p.method = parse_nms_method(method);
    p.sigma = sigma;
    p.iou_threshold = iou_threshold;
    p.score_floor = score_floor;
    p.iou_kind = parse_iou_kind(iou);
    validate_nms_params(p);
    return p;
  }
};

void AddNmsFlags(CLI::App* cmd, NmsFlags& f) {
  cmd->add_option("--method", f.method, "Score decay: hard, linear or gaussian")
      ->check(CLI::IsMember({"hard", "linear", "gaussian"}))
      ->capture_default_str();
  cmd->add_option("--sigma", f.sigma, "Gaussian decay width")
      ->capture_default_str();
  cmd->add_option("--nt", f.iou_threshold,
                  "IoU above which hard/linear decay applies")
      ->capture_default_str();
  cmd->add_option("--score-floor", f.score_floor,
                  "Drop detections decayed below this score")
      ->capture_default_str();
  cmd->add_option("--iou", f.iou, "Overlap measure: mask or bbox")
      ->check(CLI::IsMember({"mask", "bbox"}))
      ->capture_default_str();
}

void AddCommon(CLI::App* cmd, int* jobs) {
  cmd->set_version_flag("--version", kVersion);
  cmd->footer(
      "\n--config FILE reads flag values from a JSON object keyed by long flag "
      "name.\nFlags given on the command line take precedence.");
  if (jobs != nullptr) {
    cmd->add_option("--jobs,-j", *jobs, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
}

std::map<std::int64_t, int> ReadWidths(const fs::path& path) {
  const Json doc = read_json_file(path);
  std::map<std::int64_t, int> widths;
  auto add = [&](std::int64_t id, const Json& w) {
    if (!w.is_number_integer() || w.get<std::int64_t>() <= 0) {
      throw ValidationError("widths: width of image " + std::to_string(id) +
                            " must be a positive integer");
    }
    widths[id] = w.get<int>();
  };
  if (doc.is_object()) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      std::size_t used = 0;
      std::int64_t id = 0;
      try {
        id = std::stoll(it.key(), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != it.key().size()) {
        throw ValidationError("widths: key \"" + it.key() + "\" is not an image id");
      }
      add(id, it.value());
    }
  } else if (doc.is_array()) {
    for (const auto& rec : doc) {
      if (!rec.is_object() || !rec.contains("image_id") ||
          !rec["image_id"].is_number_integer() || !rec.contains("width")) {
        throw ValidationError("widths: entries need image_id and width");
      }
      add(rec["image_id"].get<std::int64_t>(), rec["width"]);
    }
  } else {
    throw ValidationError("widths file must be an object or array");
  }
  return widths;
}

std::vector<Detection> LoadResults(const std::string& path,
                                   const std::optional<Dataset>& dataset) {
  return dataset ? parse_results(path, *dataset) : parse_results(path);
}

void Log(std::ostream& err, const std::string& msg) {
  err << "segkit: " << msg << "\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Instance-segmentation pipeline toolkit", "segkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON file with flag values");
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);

  // validate
  std::string validate_dataset_path, validate_results_path;
  auto* validate = app.add_subcommand("validate", "Check a dataset and optional results file");
  AddCommon(validate, nullptr);
  validate->add_option("--dataset", validate_dataset_path, "COCO dataset JSON")
      ->required();
  validate->add_option("--results", validate_results_path, "Results JSON");

  // augment
  AugmentParams aug;
  std::string aug_dataset, aug_images, aug_out, aug_out_images;
  int aug_jobs = 1;
  auto* augment = app.add_subcommand("augment", "Scale/crop/flip and Copy-Paste augmentation");
  AddCommon(augment, &aug_jobs);
  augment->add_option("--dataset", aug_dataset, "Input COCO dataset")->required();
  augment->add_option("--images", aug_images,
                      "Directory of input PNGs; enables pixel mode");
  augment->add_option("--out", aug_out, "Output dataset JSON")->required();
  augment->add_option("--out-images", aug_out_images,
                      "Directory for augmented PNGs (pixel mode)");
  augment->add_option("--seed", aug.seed, "Random seed")->capture_default_str();
  augment->add_option("--paste-min", aug.paste_min)->capture_default_str();
  augment->add_option("--paste-max", aug.paste_max)->capture_default_str();
  augment->add_option("--min-remaining-area", aug.min_remaining_area)
      ->capture_default_str();
  augment->add_option("--short-min", aug.short_side_min)->capture_default_str();
  augment->add_option("--short-max", aug.short_side_max)->capture_default_str();
  augment->add_option("--long-cap", aug.long_side_cap)->capture_default_str();
  augment->add_option("--crop-width", aug.crop_width)->capture_default_str();
  augment->add_option("--crop-height", aug.crop_height)->capture_default_str();
  augment->add_option("--flip-prob", aug.hflip_prob)->capture_default_str();

  // nms
  NmsFlags nms_flags;
  std::string nms_in, nms_out, nms_dataset;
  int nms_jobs = 1;
  auto* nms = app.add_subcommand("nms", "Per-category Soft-NMS over a results file");
  AddCommon(nms, &nms_jobs);
  AddNmsFlags(nms, nms_flags);
  nms->add_option("--dataset", nms_dataset, "Dataset to validate against");
  nms->add_option("input", nms_in, "Input results JSON")->required();
  nms->add_option("output", nms_out, "Output results JSON")->required();

  // tta-merge
  NmsFlags tta_flags;
  std::string tta_original, tta_flipped, tta_widths, tta_dataset, tta_out;
  int tta_jobs = 1;
  auto* tta = app.add_subcommand("tta-merge", "Unflip flipped-image results and fuse");
  AddCommon(tta, &tta_jobs);
  AddNmsFlags(tta, tta_flags);
  tta->add_option("--original", tta_original, "Results on original images")
      ->required();
  tta->add_option("--flipped", tta_flipped, "Results on flipped images")
      ->required();
  auto* widths_opt =
      tta->add_option("--widths", tta_widths, "JSON map image_id -> width");
  auto* tta_dataset_opt =
      tta->add_option("--dataset", tta_dataset, "Dataset providing widths");
  widths_opt->excludes(tta_dataset_opt);
  tta->add_option("--out", tta_out, "Fused results JSON")->required();

  // ensemble
  NmsFlags ens_flags;
  std::string ens_a, ens_b, ens_dataset, ens_route, ens_route_file, ens_out,
      ens_mode;
  int ens_jobs = 1;
  auto* ensemble = app.add_subcommand("ensemble", "Per-category integration of two models");
  AddCommon(ensemble, &ens_jobs);
  AddNmsFlags(ensemble, ens_flags);
  ensemble->add_option("--a", ens_a, "Results of model A")->required();
  ensemble->add_option("--b", ens_b, "Results of model B")->required();
  ensemble->add_option("--dataset", ens_dataset, "Dataset with category names")
      ->required();
  auto* route_opt = ensemble->add_option(
      "--route", ens_route, "Routing, e.g. \"default=A,cane=B\"");
  auto* route_file_opt =
      ensemble->add_option("--route-file", ens_route_file, "Routing JSON file");
  route_opt->excludes(route_file_opt);
  ensemble->add_option("--mode", ens_mode, "route or merge")
      ->check(CLI::IsMember({"route", "merge"}));
  ensemble->add_option("--out", ens_out, "Integrated results JSON")->required();

  // swa-average
  std::vector<std::string> swa_inputs;
  std::string swa_out;
  int swa_jobs = 1;
  auto* swa_avg = app.add_subcommand("swa-average", "Average weight snapshots");
  AddCommon(swa_avg, &swa_jobs);
  swa_avg->add_option("snapshots", swa_inputs, "Snapshot directories or JSON files")
      ->required();
  swa_avg->add_option("--out", swa_out, "Output snapshot (directory or .json)")
      ->required();

  // swa-schedule
  double lr_start = kSwaAdamwLr, lr_end = 1e-5;
  int steps = 0, cycles = 0;
  std::string sched_out;
  auto* swa_sched = app.add_subcommand("swa-schedule", "Cyclic learning-rate schedule");
  AddCommon(swa_sched, nullptr);
  swa_sched->add_option("--start", lr_start, "Learning rate at cycle start")
      ->capture_default_str();
  swa_sched->add_option("--end", lr_end, "Learning rate at cycle end")
      ->capture_default_str();
  swa_sched->add_option("--steps", steps, "Steps per cycle")->required();
  swa_sched->add_option("--cycles", cycles, "Number of cycles")->required();
  swa_sched->add_option("--out", sched_out, "Output JSON")->required();

  // evaluate
  std::string eval_gt, eval_results, eval_iou = "mask", eval_report;
  int eval_max_dets = 100;
  int eval_jobs = 1;
  auto* evaluate = app.add_subcommand("evaluate", "AP@[0.50:0.95] of a results file");
  AddCommon(evaluate, &eval_jobs);
  evaluate->add_option("--gt", eval_gt, "Ground-truth dataset")->required();
  evaluate->add_option("--results", eval_results, "Results JSON")->required();
  evaluate->add_option("--iou", eval_iou, "mask or bbox")
      ->check(CLI::IsMember({"mask", "bbox"}))
      ->capture_default_str();
  evaluate->add_option("--max-dets", eval_max_dets, "Detections per image and category")
      ->capture_default_str();
  evaluate->add_option("--report", eval_report, "Write the JSON report here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    CLI::App* failing = &app;
    for (CLI::App* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kUsageError;
  }

  try {
    if (validate->parsed()) {
      const Dataset ds = parse_dataset(validate_dataset_path);
      out << "dataset ok: " << ds.images.size() << " images, "
          << ds.categories.size() << " categories, " << ds.annotations.size()
          << " annotations\n";
      if (!validate_results_path.empty()) {
        const auto dets = parse_results(validate_results_path, ds);
        out << "results ok: " << dets.size() << " detections\n";
      }
    } else if (augment->parsed()) {
      validate_augment_params(aug);
      const Dataset ds = parse_dataset(aug_dataset);
      auto images = split_dataset(ds);
      const bool pixel_mode = !aug_images.empty();
      if (pixel_mode) {
        for (auto& ai : images) {
          ai.pixels = read_png(fs::path(aug_images) / ai.image.file_name);
          if (ai.pixels->width != ai.image.width ||
              ai.pixels->height != ai.image.height) {
            throw ValidationError("image " + std::to_string(ai.image.id) +
                                  ": png size differs from dataset entry");
          }
        }
      }
      auto augmented = augment_images(images, aug, aug_jobs);
      if (pixel_mode) {
        fs::path dir(aug_out_images);
        if (dir.empty()) {
          dir = fs::path(aug_out).replace_extension("").string() + "_images";
        }
        fs::create_directories(dir);
        for (auto& ai : augmented) {
          ai.image.file_name =
              fs::path(ai.image.file_name).replace_extension(".png").string();
          const fs::path target = dir / ai.image.file_name;
          fs::create_directories(target.parent_path());
          write_png(*ai.pixels, target);
        }
      }
      const Dataset result = join_dataset(augmented, ds);
      write_dataset(result, aug_out);
      Log(err, "wrote " + std::to_string(result.annotations.size()) +
                   " annotations over " + std::to_string(result.images.size()) +
                   " images to " + aug_out);
    } else if (nms->parsed()) {
      const NmsParams params = nms_flags.params();
      std::optional<Dataset> ds;
      if (!nms_dataset.empty()) ds = parse_dataset(nms_dataset);
      const auto dets = LoadResults(nms_in, ds);
      const auto kept = soft_nms_grouped(dets, params, nms_jobs);
      write_results(kept, nms_out);
      Log(err, "kept " + std::to_string(kept.size()) + " of " +
                   std::to_string(dets.size()) + " detections");
    } else if (tta->parsed()) {
      const NmsParams params = tta_flags.params();
      std::optional<Dataset> ds;
      std::map<std::int64_t, int> widths;
      if (!tta_dataset.empty()) {
        ds = parse_dataset(tta_dataset);
        for (const auto& img : ds->images) widths[img.id] = img.width;
      } else if (!tta_widths.empty()) {
        widths = ReadWidths(tta_widths);
      } else {
        throw CLI::RequiredError("--widths or --dataset");
      }
      const auto original = LoadResults(tta_original, ds);
      const auto flipped = LoadResults(tta_flipped, ds);
      const std::vector<std::vector<Detection>> branches{
          original, unflip_detections(flipped, widths)};
      const auto fused = fuse_result_sets(branches, params, tta_jobs);
      write_results(fused, tta_out);
      Log(err, "fused " + std::to_string(original.size()) + " + " +
                   std::to_string(flipped.size()) + " -> " +
                   std::to_string(fused.size()) + " detections");
    } else if (ensemble->parsed()) {
      const NmsParams params = ens_flags.params();
      const Dataset ds = parse_dataset(ens_dataset);
      RoutingTable routing;
      if (!ens_route_file.empty()) {
        routing = routing_from_json(read_json_file(ens_route_file), ds);
      } else if (!ens_route.empty()) {
        routing = parse_routing(ens_route, ds);
      }
      if (ens_mode == "merge") routing.mode = EnsembleMode::kMerge;
      if (ens_mode == "route") routing.mode = EnsembleMode::kRoute;
      const auto a = parse_results(ens_a, ds);
      const auto b = parse_results(ens_b, ds);
      const auto merged =
          integrate_by_category(a, b, routing, ds.categories, params, ens_jobs);
      write_results(merged, ens_out);
      Log(err, "integrated " + std::to_string(merged.size()) + " detections");
    } else if (swa_avg->parsed()) {
      std::vector<WeightSnapshot> snaps;
      for (const auto& p : swa_inputs) snaps.push_back(read_snapshot(p));
      const WeightSnapshot avg = average_snapshots(snaps, swa_jobs);
      write_snapshot(avg, swa_out);
      Log(err, "averaged " + std::to_string(snaps.size()) + " snapshots into " +
                   swa_out);
    } else if (swa_sched->parsed()) {
      const LrSchedule schedule = cyclic_lr_schedule(lr_start, lr_end, steps, cycles);
      Json doc = Json::object();
      doc["lr_start"] = lr_start;
      doc["lr_end"] = lr_end;
      doc["steps_per_cycle"] = steps;
      doc["cycles"] = cycles;
      doc["values"] = schedule.values;
      write_json_file(doc, sched_out);
    } else if (evaluate->parsed()) {
      EvalParams params;
      params.iou_kind = parse_iou_kind(eval_iou);
      params.max_dets_per_image = eval_max_dets;
      const Dataset gt = parse_dataset(eval_gt);
      const auto dets = parse_results(eval_results, gt);
      const EvalReport report = evaluate_map(gt, dets, params, eval_jobs);
      out << format_report_table(report);
      if (!eval_report.empty()) {
        write_json_file(report_to_json(report, params), eval_report);
      }
    }
  } catch (const CLI::RequiredError& e) {
    err << "segkit: " << e.what() << "\n";
    return kUsageError;
  } catch (const ParseError& e) {
    err << "segkit: parse error at byte " << e.byte_offset() << ": " << e.what()
        << "\n";
    return kDataError;
  } catch (const ValidationError& e) {
    err << "segkit: validation failed:\n";
    for (const auto& issue : e.issues()) err << "  " << issue << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "segkit: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace segkit::cli
