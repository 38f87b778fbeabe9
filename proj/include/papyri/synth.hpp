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

// Synthetic manuscript pages and simulated detector output.
//
// A scene is a single page of text laid out row by row; its ground truth
// comes with the exact reading-order transcript so layout recovery can be
// checked against the truth. perturb() plays the role of one trained
// detector: it drops, jitters, relabels and scores ground-truth boxes and
// sprinkles spurious boxes over the page.
//
// Random draws (see random.hpp for the generator), in order:
//   scene, stream derive_seed(scene.seed, 0):
//     per line: chars = min + index(max - min + 1)
//     per char: label index, width factor, height factor, baseline offset
//   perturb, stream derive_seed(noise.seed, image_id) per image:
//     per annotation (dataset order): drop uniform; if kept: 4 normals
//       (x1, y1, x2, y2 jitter), 1 uniform (relabel), 1 normal (score)
//     then poisson(spurious_rate); per spurious box: label index,
//       x uniform, y uniform, 1 normal (score)
//   corpus image k (1-based) is the scene for seed derive_seed(seed, k).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "papyri/coco.hpp"
#include "papyri/error.hpp"
#include "papyri/random.hpp"
#include "papyri/transcript.hpp"

namespace papyri {

struct SceneSpec {
  std::uint64_t seed = 1;
  std::size_t lines = 12;
  std::size_t min_chars_per_line = 16;
  std::size_t max_chars_per_line = 28;
  double glyph_width = 28.0;
  double glyph_height = 36.0;
  double size_jitter = 0.05;       // relative, uniform in [-j, j]
  double baseline_jitter = 0.02;   // fraction of glyph height, uniform in [-j, j]
  double char_gap = 0.3;           // fraction of glyph width
  double line_gap = 0.5;           // fraction of glyph height
  double paragraph_gap = 2.5;      // extra space before a new paragraph, fraction of glyph height
  std::vector<std::size_t> paragraph_breaks;  // k: a paragraph starts at line k (0-based)
  std::vector<CategoryId> alphabet;            // empty: every evaluated category
  double margin = 40.0;
  CategoryTable categories = CategoryTable::greek_default();

  std::vector<CategoryId> effective_alphabet() const {
    return alphabet.empty() ? categories.evaluated_ids() : alphabet;
  }

  void validate() const {
    if (lines == 0) throw RangeError("scene: lines must be positive");
    if (min_chars_per_line == 0 || max_chars_per_line < min_chars_per_line) {
      throw RangeError("scene: chars per line must satisfy 0 < min <= max");
    }
    if (!(glyph_width > 0.0) || !(glyph_height > 0.0)) {
      throw RangeError("scene: glyph size must be positive");
    }
    if (!(size_jitter >= 0.0 && size_jitter < 1.0)) throw RangeError("scene: size_jitter must lie in [0, 1)");
    if (!(baseline_jitter >= 0.0)) throw RangeError("scene: baseline_jitter must be non-negative");
    if (!(char_gap >= 0.0) || !(line_gap >= 0.0) || !(paragraph_gap >= 0.0) || !(margin >= 0.0)) {
      throw RangeError("scene: gaps and margin must be non-negative");
    }
    for (std::size_t b : paragraph_breaks) {
      if (b == 0 || b >= lines) throw RangeError("scene: paragraph break outside (0, lines)");
    }
    const auto alpha = effective_alphabet();
    if (alpha.empty()) throw RangeError("scene: alphabet is empty");
    for (CategoryId id : alpha) {
      if (!categories.contains(id)) {
        throw ReferentialError("scene: alphabet category " + std::to_string(id) + " not in table");
      }
    }
  }
};

struct Scene {
  Dataset dataset;
  std::vector<Transcript> transcripts;  // one per image, same order as dataset.images
};

namespace detail {

inline void lay_out_page(const SceneSpec& spec, std::uint64_t seed, ImageId image_id,
                         AnnotationId& next_ann, Scene& scene) {
  Rng rng(derive_seed(seed, 0));
  const auto alpha = spec.effective_alphabet();
  const double gw = spec.glyph_width;
  const double gh = spec.glyph_height;

  Transcript t;
  t.document_id = "scene-" + std::to_string(seed);
  double center_y = spec.margin + 0.5 * gh;
  double max_right = spec.margin;
  double max_bottom = spec.margin;
  for (std::size_t li = 0; li < spec.lines; ++li) {
    const bool new_paragraph =
        li == 0 || std::find(spec.paragraph_breaks.begin(), spec.paragraph_breaks.end(), li) !=
                       spec.paragraph_breaks.end();
    if (li > 0) {
      center_y += gh * (1.0 + spec.line_gap);
      if (new_paragraph) center_y += gh * spec.paragraph_gap;
    }
    if (new_paragraph) t.paragraphs.emplace_back();

    const std::size_t chars =
        spec.min_chars_per_line + rng.index(spec.max_chars_per_line - spec.min_chars_per_line + 1);
    std::string text;
    double cursor = spec.margin;
    for (std::size_t ci = 0; ci < chars; ++ci) {
      const CategoryId label = alpha[rng.index(alpha.size())];
      const double w = gw * (1.0 + rng.uniform(-spec.size_jitter, spec.size_jitter));
      const double h = gh * (1.0 + rng.uniform(-spec.size_jitter, spec.size_jitter));
      const double cy = center_y + gh * rng.uniform(-spec.baseline_jitter, spec.baseline_jitter);
      Annotation a;
      a.id = next_ann++;
      a.image_id = image_id;
      a.category_id = label;
      a.bbox = Box{cursor, cy - 0.5 * h, w, h};
      a.extra = Json::object({{"area", w * h}, {"iscrowd", 0}});
      max_right = std::max(max_right, a.bbox.right());
      max_bottom = std::max(max_bottom, a.bbox.bottom());
      scene.dataset.annotations.push_back(std::move(a));
      text += glyph_for(spec.categories.find(label)->name);
      cursor += w + spec.char_gap * gw;
    }
    t.paragraphs.back().push_back(std::move(text));
  }

  ImageRecord im;
  im.id = image_id;
  im.file_name = t.document_id + ".png";
  im.width = std::ceil(max_right + spec.margin);
  im.height = std::ceil(max_bottom + spec.margin);
  scene.dataset.images.push_back(std::move(im));
  scene.transcripts.push_back(std::move(t));
}

}  // namespace detail

// One page, image id 1, annotation ids from 1.
inline Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Scene scene;
  scene.dataset.categories = spec.categories;
  AnnotationId next = 1;
  detail::lay_out_page(spec, spec.seed, 1, next, scene);
  return scene;
}

// `images` pages with ids 1..images; page k uses seed derive_seed(spec.seed, k).
inline Scene generate_corpus(const SceneSpec& spec, std::size_t images) {
  spec.validate();
  Scene scene;
  scene.dataset.categories = spec.categories;
  AnnotationId next = 1;
  for (std::size_t k = 1; k <= images; ++k) {
    detail::lay_out_page(spec, derive_seed(spec.seed, k), static_cast<ImageId>(k), next, scene);
  }
  return scene;
}

struct ScoreModel {
  double mean = 0.8;
  double sd = 0.1;
};

// Row-stochastic relabeling: confusion[from] = [(to, probability), ...].
// Categories without a row keep their label.
using LabelConfusion = std::map<CategoryId, std::vector<std::pair<CategoryId, double>>>;

// Keeps a label with probability 1 - rate and otherwise moves it uniformly to
// one of the other ids.
inline LabelConfusion uniform_confusion(const std::vector<CategoryId>& ids, double rate) {
  LabelConfusion c;
  if (ids.size() < 2 || rate <= 0.0) return c;
  const double off = rate / static_cast<double>(ids.size() - 1);
  for (CategoryId from : ids) {
    auto& row = c[from];
    for (CategoryId to : ids) row.emplace_back(to, to == from ? 1.0 - rate : off);
  }
  return c;
}

struct NoiseSpec {
  std::uint64_t seed = 1;
  double jitter_sigma = 0.0;  // pixels, per corner coordinate
  double drop_probability = 0.0;
  double spurious_rate = 0.0;  // Poisson mean per image
  LabelConfusion confusion;
  ScoreModel tp_score{0.8, 0.1};
  ScoreModel fp_score{0.3, 0.1};

  static constexpr double kMaxSpuriousRate = 500.0;

  void validate() const {
    if (!(jitter_sigma >= 0.0)) throw RangeError("noise: jitter_sigma must be non-negative");
    if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) {
      throw RangeError("noise: drop_probability must lie in [0, 1]");
    }
    if (!(spurious_rate >= 0.0 && spurious_rate <= kMaxSpuriousRate)) {
      throw RangeError("noise: spurious_rate must lie in [0, 500]");
    }
    if (!(tp_score.sd >= 0.0) || !(fp_score.sd >= 0.0)) {
      throw RangeError("noise: score sd must be non-negative");
    }
    for (const auto& [from, row] : confusion) {
      double sum = 0.0;
      for (const auto& [to, p] : row) {
        if (!(p >= 0.0 && p <= 1.0)) throw RangeError("noise: confusion probabilities must lie in [0, 1]");
        sum += p;
      }
      if (std::fabs(sum - 1.0) > 1e-9) {
        throw RangeError("noise: confusion row " + std::to_string(from) + " does not sum to 1");
      }
    }
  }
};

namespace detail {

inline double draw_score(Rng& rng, const ScoreModel& m) {
  return std::clamp(rng.normal(m.mean, m.sd), 0.0, 1.0);
}

inline CategoryId relabel(const LabelConfusion& confusion, CategoryId label, double u) {
  auto it = confusion.find(label);
  if (it == confusion.end() || it->second.empty()) return label;
  double acc = 0.0;
  for (const auto& [to, p] : it->second) {
    acc += p;
    if (u < acc) return to;
  }
  return it->second.back().first;
}

}  // namespace detail

// Simulated detector output for every image of `gt`. Deterministic per
// (noise.seed, image id); see the header comment for the draw order.
inline PredictionSet perturb(const Dataset& gt, const NoiseSpec& noise) {
  noise.validate();
  std::map<ImageId, std::vector<const Annotation*>> per_image;
  for (const auto& a : gt.annotations) per_image[a.image_id].push_back(&a);

  std::vector<CategoryId> spurious_labels = gt.categories.evaluated_ids();
  if (spurious_labels.empty()) {
    for (const auto& c : gt.categories.entries()) spurious_labels.push_back(c.id);
  }

  PredictionSet out;
  for (const auto& im : gt.images) {
    Rng rng(derive_seed(noise.seed, static_cast<std::uint64_t>(im.id)));
    auto& boxes = out.images[im.id];
    const auto& anns = per_image[im.id];
    double sum_w = 0.0, sum_h = 0.0;
    for (const Annotation* a : anns) {
      sum_w += a->bbox.w;
      sum_h += a->bbox.h;
      if (rng.uniform() < noise.drop_probability) continue;
      const double dx1 = rng.normal(0.0, noise.jitter_sigma);
      const double dy1 = rng.normal(0.0, noise.jitter_sigma);
      const double dx2 = rng.normal(0.0, noise.jitter_sigma);
      const double dy2 = rng.normal(0.0, noise.jitter_sigma);
      Box b = a->bbox;
      if (noise.jitter_sigma > 0.0) {
        const double x1 = b.left() + dx1;
        const double y1 = b.top() + dy1;
        const double x2 = std::max(b.right() + dx2, x1 + 0.01 * b.w);
        const double y2 = std::max(b.bottom() + dy2, y1 + 0.01 * b.h);
        b = box_from_corners(x1, y1, x2, y2);
      }
      const CategoryId label = detail::relabel(noise.confusion, a->category_id, rng.uniform());
      boxes.push_back({b, label, detail::draw_score(rng, noise.tp_score)});
    }

    const double w = anns.empty() ? 0.05 * im.width : sum_w / static_cast<double>(anns.size());
    const double h = anns.empty() ? 0.05 * im.height : sum_h / static_cast<double>(anns.size());
    const std::uint64_t spurious = rng.poisson(noise.spurious_rate);
    for (std::uint64_t s = 0; s < spurious; ++s) {
      const CategoryId label = spurious_labels[rng.index(spurious_labels.size())];
      const double x = rng.uniform(0.0, std::max(0.0, im.width - w));
      const double y = rng.uniform(0.0, std::max(0.0, im.height - h));
      boxes.push_back({Box{x, y, w, h}, label, detail::draw_score(rng, noise.fp_score)});
    }
    if (boxes.empty()) out.images.erase(im.id);
  }
  return out;
}

// Declarative configuration. Keys mirror the struct fields; unknown keys are
// rejected so typos do not silently fall back to defaults.
//
// scene: seed, lines, min_chars_per_line, max_chars_per_line, glyph_width,
//   glyph_height, size_jitter, baseline_jitter, char_gap, line_gap,
//   paragraph_gap, paragraph_breaks [line index...], alphabet [name or id...],
//   margin
// noise: seed, jitter_sigma, drop_probability, spurious_rate,
//   label_confusion (rate spread uniformly over the alphabet) or
//   confusion_matrix {"from_id": {"to_id": p}}, tp_score {mean, sd},
//   fp_score {mean, sd}
namespace detail {

inline void reject_unknown(const Json& j, std::initializer_list<const char*> known, const std::string& ctx) {
  auto extra = extras_of(j, known);
  if (!extra.empty()) throw SchemaError(ctx + ": unknown key '" + extra.begin().key() + "'");
}

template <typename T>
void read_opt(const Json& j, const char* key, T& dst, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    dst = it->get<T>();
  } catch (const Json::exception&) {
    throw SchemaError(ctx + ": field '" + key + "' has the wrong type");
  }
}

inline CategoryId id_from_key(const std::string& key, const std::string& ctx) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != key.size()) throw SchemaError(ctx + ": '" + key + "' is not a category id");
  return v;
}

inline ScoreModel score_model_from_json(const Json& j, ScoreModel m, const std::string& ctx) {
  if (!j.is_object()) throw SchemaError(ctx + ": must be an object");
  reject_unknown(j, {"mean", "sd"}, ctx);
  read_opt(j, "mean", m.mean, ctx);
  read_opt(j, "sd", m.sd, ctx);
  return m;
}

}  // namespace detail

inline SceneSpec scene_spec_from_json(const Json& j, const std::string& ctx = "scene") {
  if (!j.is_object()) throw SchemaError(ctx + ": must be an object");
  detail::reject_unknown(j,
                         {"seed", "lines", "min_chars_per_line", "max_chars_per_line", "glyph_width",
                          "glyph_height", "size_jitter", "baseline_jitter", "char_gap", "line_gap",
                          "paragraph_gap", "paragraph_breaks", "alphabet", "margin"},
                         ctx);
  SceneSpec s;
  detail::read_opt(j, "seed", s.seed, ctx);
  detail::read_opt(j, "lines", s.lines, ctx);
  detail::read_opt(j, "min_chars_per_line", s.min_chars_per_line, ctx);
  detail::read_opt(j, "max_chars_per_line", s.max_chars_per_line, ctx);
  detail::read_opt(j, "glyph_width", s.glyph_width, ctx);
  detail::read_opt(j, "glyph_height", s.glyph_height, ctx);
  detail::read_opt(j, "size_jitter", s.size_jitter, ctx);
  detail::read_opt(j, "baseline_jitter", s.baseline_jitter, ctx);
  detail::read_opt(j, "char_gap", s.char_gap, ctx);
  detail::read_opt(j, "line_gap", s.line_gap, ctx);
  detail::read_opt(j, "paragraph_gap", s.paragraph_gap, ctx);
  detail::read_opt(j, "paragraph_breaks", s.paragraph_breaks, ctx);
  detail::read_opt(j, "margin", s.margin, ctx);
  if (auto it = j.find("alphabet"); it != j.end()) {
    if (!it->is_array()) throw SchemaError(ctx + ": 'alphabet' must be an array");
    for (const auto& e : *it) {
      if (e.is_number_integer()) {
        s.alphabet.push_back(e.get<CategoryId>());
      } else if (e.is_string()) {
        auto id = s.categories.id_for_name(e.get<std::string>());
        if (!id) throw ReferentialError(ctx + ": unknown alphabet entry '" + e.get<std::string>() + "'");
        s.alphabet.push_back(*id);
      } else {
        throw SchemaError(ctx + ": alphabet entries must be names or ids");
      }
    }
  }
  s.validate();
  return s;
}

inline NoiseSpec noise_spec_from_json(const Json& j, const std::vector<CategoryId>& alphabet,
                                      const std::string& ctx = "noise") {
  if (!j.is_object()) throw SchemaError(ctx + ": must be an object");
  detail::reject_unknown(j,
                         {"seed", "jitter_sigma", "drop_probability", "spurious_rate", "label_confusion",
                          "confusion_matrix", "tp_score", "fp_score"},
                         ctx);
  NoiseSpec n;
  detail::read_opt(j, "seed", n.seed, ctx);
  detail::read_opt(j, "jitter_sigma", n.jitter_sigma, ctx);
  detail::read_opt(j, "drop_probability", n.drop_probability, ctx);
  detail::read_opt(j, "spurious_rate", n.spurious_rate, ctx);
  if (auto it = j.find("label_confusion"); it != j.end()) {
    if (!it->is_number()) throw SchemaError(ctx + ": 'label_confusion' must be a number");
    const double rate = it->get<double>();
    if (!(rate >= 0.0 && rate <= 1.0)) throw RangeError(ctx + ": label_confusion must lie in [0, 1]");
    n.confusion = uniform_confusion(alphabet, rate);
  }
  if (auto it = j.find("confusion_matrix"); it != j.end()) {
    if (!it->is_object()) throw SchemaError(ctx + ": 'confusion_matrix' must be an object");
    n.confusion.clear();
    for (auto row = it->begin(); row != it->end(); ++row) {
      if (!row.value().is_object()) throw SchemaError(ctx + ": confusion rows must be objects");
      auto& dst = n.confusion[detail::id_from_key(row.key(), ctx)];
      for (auto cell = row.value().begin(); cell != row.value().end(); ++cell) {
        if (!cell.value().is_number()) throw SchemaError(ctx + ": confusion entries must be numbers");
        dst.emplace_back(detail::id_from_key(cell.key(), ctx), cell.value().get<double>());
      }
    }
  }
  if (auto it = j.find("tp_score"); it != j.end()) {
    n.tp_score = detail::score_model_from_json(*it, n.tp_score, ctx + ".tp_score");
  }
  if (auto it = j.find("fp_score"); it != j.end()) {
    n.fp_score = detail::score_model_from_json(*it, n.fp_score, ctx + ".fp_score");
  }
  n.validate();
  return n;
}

}  // namespace papyri
