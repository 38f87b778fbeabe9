// Copyright 2026 The papyri Authors. All Rights Reserved.
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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "papyri/eval.hpp"
#include "papyri/fusion.hpp"
#include "papyri/layout.hpp"

namespace papyri::cli {

// Settings for the end-to-end `pipeline` subcommand, read from a JSON file.
// Relative paths resolve against the config file's directory.
//
//   {
//     "predictions": ["model-1.json", ...],      // required, one per detector
//     "families": ["simclr.json", "deit.json"],  // optional recognizer outputs
//     "dataset": "gt.json",                      // optional: names + categories
//     "out_dir": "out",                          // required
//     "fusion": {"iou": 0.55, "skip": 0.0, "rescale": "clipped"},
//     "postprocess": {"min_conf": 0.3, "iou": 0.5},
//     "layout": {"feather_x": 0.4, "feather_y": 0.1, "para_gap": 1.8},
//     "tei": true
//   }
struct PipelineConfig {
  std::vector<std::filesystem::path> predictions;
  std::vector<std::filesystem::path> families;
  std::optional<std::filesystem::path> dataset;
  std::filesystem::path out_dir;
  FusionConfig fusion;
  double min_conf = 0.3;
  double overlap_iou = 0.5;
  LayoutConfig layout;
  bool tei = true;

  static PipelineConfig load(const std::filesystem::path& path);
};

// Runs one invocation. `args` excludes the program name. Returns the process
// exit status; diagnostics go to `err`, reports and search hits to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace papyri::cli
