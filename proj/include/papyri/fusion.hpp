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

// Multi-model box fusion (Weighted Boxes Fusion) and the two post-filters
// applied before layout analysis: a confidence cut and greedy,
// class-agnostic overlap suppression.

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "papyri/coco.hpp"
#include "papyri/error.hpp"
#include "papyri/geometry.hpp"

namespace papyri {

enum class ScoreRescale {
  proportional,  // mean score * N / T, capped at 1
  clipped,       // mean score * min(N, T) / T
};

struct FusionConfig {
  double iou_match_threshold = 0.55;
  double skip_box_threshold = 0.0;
  // T in the rescale rule. 0 means "number of per-model lists passed in".
  std::size_t model_count = 0;
  ScoreRescale rescale = ScoreRescale::clipped;

  void validate() const {
    if (!(iou_match_threshold > 0.0 && iou_match_threshold < 1.0)) {
      throw RangeError("iou_match_threshold must lie in (0, 1)");
    }
    if (!(skip_box_threshold >= 0.0 && skip_box_threshold <= 1.0)) {
      throw RangeError("skip_box_threshold must lie in [0, 1]");
    }
  }
};

struct Contributor {
  std::size_t model = 0;
  double score = 0.0;

  friend bool operator==(const Contributor&, const Contributor&) = default;
};

struct FusedBox {
  Box bbox;
  CategoryId category_id = 0;
  double score = 0.0;
  std::size_t source_count = 0;
  std::vector<Contributor> contributors;

  ScoredBox as_scored() const { return ScoredBox{bbox, category_id, score}; }
};

namespace detail {

// Orders candidates for greedy passes: score descending, then larger area,
// then earlier input position.
struct RankedBox {
  ScoredBox box;
  std::size_t model = 0;
  std::size_t input_index = 0;
};

inline bool ranks_before(const RankedBox& a, const RankedBox& b) {
  if (a.box.score != b.box.score) return a.box.score > b.box.score;
  const double aa = a.box.bbox.area();
  const double ba = b.box.bbox.area();
  if (aa != ba) return aa > ba;
  return a.input_index < b.input_index;
}

class WbfCluster {
 public:
  explicit WbfCluster(const RankedBox& first) { add(first); }

  void add(const RankedBox& r) {
    const double s = r.box.score;
    members_.push_back({r.model, s});
    weight_ += s;
    score_sum_ += s;
    x1_ += s * r.box.bbox.left();
    y1_ += s * r.box.bbox.top();
    x2_ += s * r.box.bbox.right();
    y2_ += s * r.box.bbox.bottom();
    ux1_ += r.box.bbox.left();
    uy1_ += r.box.bbox.top();
    ux2_ += r.box.bbox.right();
    uy2_ += r.box.bbox.bottom();
    if (weight_ > 0.0) {
      fused_ = box_from_corners(x1_ / weight_, y1_ / weight_, x2_ / weight_, y2_ / weight_);
    } else {
      // All-zero scores: fall back to the plain mean.
      const auto n = static_cast<double>(members_.size());
      fused_ = box_from_corners(ux1_ / n, uy1_ / n, ux2_ / n, uy2_ / n);
    }
  }

  const Box& fused() const { return fused_; }
  const std::vector<Contributor>& members() const { return members_; }
  double mean_score() const { return score_sum_ / static_cast<double>(members_.size()); }

 private:
  std::vector<Contributor> members_;
  double weight_ = 0.0, score_sum_ = 0.0;
  double x1_ = 0.0, y1_ = 0.0, x2_ = 0.0, y2_ = 0.0;
  double ux1_ = 0.0, uy1_ = 0.0, ux2_ = 0.0, uy2_ = 0.0;
  Box fused_;
};

inline double rescale_score(double mean, std::size_t n, std::size_t t, ScoreRescale mode) {
  const auto nd = static_cast<double>(n);
  const auto td = static_cast<double>(t);
  switch (mode) {
    case ScoreRescale::proportional:
      return std::min(1.0, mean * nd / td);
    case ScoreRescale::clipped:
      return mean * std::min(nd, td) / td;
  }
  return mean;
}

}  // namespace detail

// Fuses one image's detections from T models. Boxes of different classes
// never merge. Candidates are visited in rank order; each joins the first
// cluster whose running fused box overlaps it with IoU above the match
// threshold, otherwise it opens a new cluster. Output is sorted by fused
// score descending (ties: class id, then cluster creation order).
inline std::vector<FusedBox> weighted_boxes_fusion(
    std::span<const std::vector<ScoredBox>> per_model, const FusionConfig& cfg = {}) {
  cfg.validate();
  const std::size_t t = cfg.model_count > 0 ? cfg.model_count : per_model.size();
  if (t == 0) return {};

  std::map<CategoryId, std::vector<detail::RankedBox>> by_class;
  std::size_t input_index = 0;
  for (std::size_t m = 0; m < per_model.size(); ++m) {
    for (const auto& b : per_model[m]) {
      if (!is_valid(b.bbox)) {
        throw RangeError("fusion input model " + std::to_string(m) + ": invalid box");
      }
      if (!(b.score >= 0.0 && b.score <= 1.0)) {
        throw RangeError("fusion input model " + std::to_string(m) + ": score outside [0, 1]");
      }
      const std::size_t idx = input_index++;
      if (b.score < cfg.skip_box_threshold) continue;
      by_class[b.category_id].push_back({b, m, idx});
    }
  }

  std::vector<FusedBox> out;
  for (auto& [category, ranked] : by_class) {
    std::sort(ranked.begin(), ranked.end(), detail::ranks_before);
    std::vector<detail::WbfCluster> clusters;
    for (const auto& r : ranked) {
      auto it = std::find_if(clusters.begin(), clusters.end(), [&](const detail::WbfCluster& c) {
        return iou(c.fused(), r.box.bbox) > cfg.iou_match_threshold;
      });
      if (it == clusters.end()) {
        clusters.emplace_back(r);
      } else {
        it->add(r);
      }
    }
    for (const auto& c : clusters) {
      FusedBox f;
      f.bbox = c.fused();
      f.category_id = category;
      f.source_count = c.members().size();
      f.score = detail::rescale_score(c.mean_score(), f.source_count, t, cfg.rescale);
      f.contributors = c.members();
      out.push_back(std::move(f));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FusedBox& a, const FusedBox& b) { return a.score > b.score; });
  return out;
}

// Boxes with score >= min_conf, order preserved.
inline std::vector<ScoredBox> filter_confidence(std::span<const ScoredBox> boxes, double min_conf) {
  if (!(min_conf >= 0.0 && min_conf <= 1.0)) throw RangeError("min_conf must lie in [0, 1]");
  std::vector<ScoredBox> out;
  std::copy_if(boxes.begin(), boxes.end(), std::back_inserter(out),
               [&](const ScoredBox& b) { return b.score >= min_conf; });
  return out;
}

// Greedy class-agnostic suppression: walk boxes in rank order and keep one
// iff its IoU with every kept box is <= iou_threshold. Survivors are
// returned in their original input order.
inline std::vector<ScoredBox> suppress_overlaps(std::span<const ScoredBox> boxes,
                                                double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw RangeError("overlap iou_threshold must lie in (0, 1)");
  }
  std::vector<detail::RankedBox> ranked;
  ranked.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) ranked.push_back({boxes[i], 0, i});
  std::sort(ranked.begin(), ranked.end(), detail::ranks_before);

  std::vector<const detail::RankedBox*> kept;
  for (const auto& r : ranked) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](const detail::RankedBox* k) {
      return iou(k->box.bbox, r.box.bbox) <= iou_threshold;
    });
    if (clear) kept.push_back(&r);
  }
  std::sort(kept.begin(), kept.end(), [](const detail::RankedBox* a, const detail::RankedBox* b) {
    return a->input_index < b->input_index;
  });
  std::vector<ScoredBox> out;
  out.reserve(kept.size());
  for (const auto* k : kept) out.push_back(k->box);
  return out;
}

}  // namespace papyri
