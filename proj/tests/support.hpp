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

// Shared fixtures: scratch directories, random instance builders and
// conversions into the oracle types.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles/reference_scorer.hpp"
#include "oracles/reference_wbf.hpp"
#include "papyri/papyri.hpp"
#include "cli.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using namespace papyri;

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("papyri-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

struct CliResult {
  int status = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.status = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::string slurp(const fs::path& p) { return detail::read_file(p); }

// Integer-grid boxes so overlaps, ties and exact IoU values are common.
inline Box grid_box(Rng& rng, double extent, double max_side) {
  const double x = std::floor(rng.uniform(0.0, extent));
  const double y = std::floor(rng.uniform(0.0, extent));
  const double w = 1.0 + std::floor(rng.uniform(0.0, max_side));
  const double h = 1.0 + std::floor(rng.uniform(0.0, max_side));
  return Box{x, y, w, h};
}

// Scores on a coarse grid half of the time so ties occur.
inline double grid_score(Rng& rng) {
  if (rng.bernoulli(0.5)) return static_cast<double>(rng.index(11)) / 10.0;
  return rng.uniform();
}

inline std::vector<std::vector<ScoredBox>> random_wbf_instance(Rng& rng, std::size_t max_models,
                                                               std::size_t max_boxes,
                                                               std::size_t max_classes) {
  const std::size_t models = 1 + rng.index(max_models);
  std::vector<std::vector<ScoredBox>> out(models);
  std::size_t total = rng.index(max_boxes + 1);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t m = rng.index(models);
    out[m].push_back({grid_box(rng, 12.0, 8.0), static_cast<CategoryId>(1 + rng.index(max_classes)),
                      grid_score(rng)});
  }
  return out;
}

inline std::vector<std::vector<oracle::RefBox>> to_ref(const std::vector<std::vector<ScoredBox>>& models) {
  std::vector<std::vector<oracle::RefBox>> out;
  for (const auto& m : models) {
    auto& dst = out.emplace_back();
    for (const auto& b : m) {
      dst.push_back({b.bbox.x, b.bbox.y, b.bbox.x + b.bbox.w, b.bbox.y + b.bbox.h, b.category_id, b.score});
    }
  }
  return out;
}

// A small evaluation instance over the default table. Labels come from a few
// letters plus punctuation, which evaluation must ignore. Predictions are a
// mix of jittered copies of ground truth and stray boxes.
struct EvalInstance {
  Dataset gt;
  PredictionSet preds;
};

inline EvalInstance random_eval_instance(Rng& rng, std::size_t max_images, std::size_t max_boxes) {
  EvalInstance inst;
  inst.gt.categories = CategoryTable::greek_default();
  const std::vector<CategoryId> labels{1, 2, 3, 11, 25, 26};
  const std::size_t images = 1 + rng.index(max_images);
  AnnotationId next = 1;
  for (std::size_t i = 1; i <= images; ++i) {
    const auto image = static_cast<ImageId>(i);
    inst.gt.images.push_back({image, "p" + std::to_string(i) + ".png", 100.0, 100.0, Json::object()});
    const std::size_t n_gt = rng.index(max_boxes + 1);
    std::vector<Box> truth;
    for (std::size_t k = 0; k < n_gt; ++k) {
      Annotation a;
      a.id = next++;
      a.image_id = image;
      a.category_id = labels[rng.index(labels.size())];
      a.bbox = grid_box(rng, 20.0, 10.0);
      truth.push_back(a.bbox);
      inst.gt.annotations.push_back(a);
    }
    const std::size_t n_pred = rng.index(max_boxes + 1);
    for (std::size_t k = 0; k < n_pred; ++k) {
      Box b;
      if (!truth.empty() && rng.bernoulli(0.7)) {
        const Box& t = truth[rng.index(truth.size())];
        b = Box{t.x + std::floor(rng.uniform(-2.0, 3.0)), t.y + std::floor(rng.uniform(-2.0, 3.0)), t.w, t.h};
      } else {
        b = grid_box(rng, 20.0, 10.0);
      }
      inst.preds.add(image, {b, labels[rng.index(labels.size())], grid_score(rng)});
    }
  }
  return inst;
}

inline oracle::RefScores reference_for(const EvalInstance& inst, EvalMode mode,
                                       const std::vector<double>& thresholds) {
  std::vector<oracle::RefGt> gts;
  for (const auto& a : inst.gt.annotations) {
    gts.push_back({a.id, a.image_id, a.category_id, a.bbox.x, a.bbox.y, a.bbox.x + a.bbox.w, a.bbox.y + a.bbox.h});
  }
  std::vector<oracle::RefPred> preds;
  for (const auto& [image, boxes] : inst.preds.images) {
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const auto& b = boxes[i];
      preds.push_back({image, i, b.category_id, b.score, b.bbox.x, b.bbox.y, b.bbox.x + b.bbox.w,
                       b.bbox.y + b.bbox.h});
    }
  }
  std::vector<std::int64_t> evaluated;
  for (std::int64_t id = 1; id <= 24; ++id) evaluated.push_back(id);
  return oracle::reference_scores(gts, preds, evaluated, mode == EvalMode::detection, thresholds);
}

// Naive search: every start position whose next |literal| code points equal
// the literal; with a wildcard the match then runs over Greek capitals.
struct NaiveHit {
  std::string doc;
  std::size_t paragraph, line, column;
  std::u32string match;
};

inline std::vector<NaiveHit> naive_search(const std::vector<Transcript>& corpus, const std::u32string& literal,
                                          bool wildcard) {
  const auto greek = [](char32_t c) { return c >= 0x391 && c <= 0x3A9 && c != 0x3A2; };
  std::vector<NaiveHit> hits;
  for (const auto& doc : corpus) {
    for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
      for (std::size_t l = 0; l < doc.paragraphs[p].size(); ++l) {
        const std::u32string line = utf8::decode(doc.paragraphs[p][l]);
        for (std::size_t s = 0; s + literal.size() <= line.size(); ++s) {
          bool ok = true;
          for (std::size_t k = 0; k < literal.size(); ++k) {
            if (line[s + k] != literal[k]) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          std::size_t e = s + literal.size();
          if (wildcard) {
            while (e < line.size() && greek(line[e])) ++e;
          }
          hits.push_back({doc.document_id, p, l, s, line.substr(s, e - s)});
        }
      }
    }
  }
  return hits;
}

// Random transcript over a small alphabet so that short literals recur.
inline Transcript random_transcript(Rng& rng, const std::string& id) {
  static const std::vector<std::string> glyphs{"Α", "Χ", "Ι", "Λ", "Ε", "Υ", "Σ", "'", "."};
  Transcript t;
  t.document_id = id;
  const std::size_t paragraphs = 1 + rng.index(3);
  for (std::size_t p = 0; p < paragraphs; ++p) {
    auto& lines = t.paragraphs.emplace_back();
    const std::size_t n = 1 + rng.index(4);
    for (std::size_t l = 0; l < n; ++l) {
      std::string line;
      const std::size_t chars = 1 + rng.index(30);
      for (std::size_t c = 0; c < chars; ++c) line += glyphs[rng.index(glyphs.size())];
      lines.push_back(line);
    }
  }
  return t;
}

// A scene spec with random but well-separated geometry.
inline SceneSpec random_scene_spec(Rng& rng, std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.lines = 1 + rng.index(10);
  s.min_chars_per_line = 1 + rng.index(10);
  s.max_chars_per_line = s.min_chars_per_line + rng.index(20);
  s.glyph_width = 20.0 + rng.uniform(0.0, 20.0);
  s.glyph_height = 28.0 + rng.uniform(0.0, 20.0);
  for (std::size_t l = 1; l < s.lines; ++l) {
    if (rng.bernoulli(0.2)) s.paragraph_breaks.push_back(l);
  }
  return s;
}

}  // namespace testing_support
