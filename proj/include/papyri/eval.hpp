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

// COCO-style detection / recognition scoring.
//
// Only evaluated categories (the Greek capitals) take part: punctuation in
// either the ground truth or the predictions is removed before matching.
// Recognition mode scores each category separately; detection mode collapses
// all evaluated categories into one before matching.
//
// Matching is greedy per image (and per category in recognition mode):
// predictions in descending score order each claim the still-unmatched ground
// truth box of highest IoU >= threshold, ties going to the lower annotation
// id. AP is the mean of the interpolated precision envelope sampled at
// `recall_sample_points` evenly spaced recall levels in [0, 1].

#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "papyri/coco.hpp"
#include "papyri/error.hpp"
#include "papyri/geometry.hpp"
#include "papyri/parallel.hpp"

namespace papyri {

enum class EvalMode { detection, recognition };

inline const char* to_string(EvalMode m) {
  return m == EvalMode::detection ? "detection" : "recognition";
}

inline EvalMode parse_eval_mode(std::string_view s) {
  if (s == "detection") return EvalMode::detection;
  if (s == "recognition") return EvalMode::recognition;
  throw RangeError("unknown evaluation mode '" + std::string(s) + "'");
}

// 0.50, 0.55, ..., 0.95, each the double nearest the decimal value.
inline std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(static_cast<double>(50 + 5 * i) / 100.0);
  return t;
}

struct EvalConfig {
  std::vector<double> iou_thresholds = coco_iou_thresholds();
  EvalMode mode = EvalMode::recognition;
  std::size_t max_detections = 2000;
  std::size_t recall_sample_points = 101;

  void validate() const {
    if (iou_thresholds.empty()) throw RangeError("at least one IoU threshold is required");
    for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
      const double t = iou_thresholds[i];
      if (!(t > 0.0 && t <= 1.0)) throw RangeError("IoU thresholds must lie in (0, 1]");
      if (i > 0 && !(t > iou_thresholds[i - 1])) {
        throw RangeError("IoU thresholds must be strictly increasing");
      }
    }
    if (max_detections == 0) throw RangeError("max_detections must be positive");
    if (recall_sample_points < 2) throw RangeError("recall_sample_points must be at least 2");
  }
};

// Bucket used for every evaluated category in detection mode.
inline constexpr CategoryId kAllCategories = 0;

struct DetectionMatch {
  ImageId image_id = 0;
  CategoryId category_id = 0;  // the prediction's own category
  std::size_t pred_index = 0;  // position within preds.images[image_id]
  double score = 0.0;
  std::optional<AnnotationId> gt_id;

  friend bool operator==(const DetectionMatch&, const DetectionMatch&) = default;
};

struct UnmatchedTruth {
  ImageId image_id = 0;
  CategoryId category_id = 0;
  AnnotationId id = 0;

  friend bool operator==(const UnmatchedTruth&, const UnmatchedTruth&) = default;
};

struct MatchResult {
  double threshold = 0.5;
  EvalMode mode = EvalMode::recognition;
  // Keyed by bucket: category id in recognition mode, kAllCategories in
  // detection mode. Detections are in image order, then score order.
  std::map<CategoryId, std::vector<DetectionMatch>> detections;
  std::map<CategoryId, std::vector<UnmatchedTruth>> unmatched;
  std::map<CategoryId, std::size_t> gt_counts;

  std::size_t true_positives() const {
    std::size_t n = 0;
    for (const auto& [k, ds] : detections) {
      for (const auto& d : ds) n += d.gt_id.has_value();
    }
    return n;
  }
  std::size_t false_positives() const {
    std::size_t n = 0;
    for (const auto& [k, ds] : detections) {
      for (const auto& d : ds) n += !d.gt_id.has_value();
    }
    return n;
  }
  std::size_t false_negatives() const {
    std::size_t n = 0;
    for (const auto& [k, us] : unmatched) n += us.size();
    return n;
  }
};

namespace detail {

struct EvalDet {
  std::size_t pred_index = 0;
  CategoryId category = 0;
  double score = 0.0;
  Box bbox;
};

// Ground truth and predictions of one image within one bucket.
struct EvalCell {
  ImageId image = 0;
  CategoryId bucket = 0;
  std::vector<const Annotation*> gt;  // ascending annotation id
  std::vector<EvalDet> dets;          // score descending, then input order
};

struct PreparedEval {
  std::vector<EvalCell> cells;  // ordered by (image, bucket)
  std::map<CategoryId, std::size_t> gt_counts;
  std::map<CategoryId, std::size_t> pred_counts;
};

inline PreparedEval prepare_eval(const Dataset& gt, const PredictionSet& preds, EvalMode mode,
                                 std::size_t max_dets) {
  std::unordered_map<ImageId, std::size_t> image_pos;
  for (std::size_t i = 0; i < gt.images.size(); ++i) image_pos.emplace(gt.images[i].id, i);

  const auto bucket_of = [&](CategoryId c) {
    return mode == EvalMode::detection ? kAllCategories : c;
  };
  std::map<std::pair<ImageId, CategoryId>, EvalCell> cells;
  PreparedEval out;
  for (const auto& a : gt.annotations) {
    if (!image_pos.count(a.image_id)) {
      throw ReferentialError("annotation " + std::to_string(a.id) + ": image_id " +
                             std::to_string(a.image_id) + " not found");
    }
    if (!gt.categories.contains(a.category_id)) {
      throw ReferentialError("annotation " + std::to_string(a.id) + ": category_id " +
                             std::to_string(a.category_id) + " not found");
    }
    if (!gt.categories.is_evaluated(a.category_id)) continue;
    const CategoryId b = bucket_of(a.category_id);
    auto& cell = cells[{a.image_id, b}];
    cell.image = a.image_id;
    cell.bucket = b;
    cell.gt.push_back(&a);
    ++out.gt_counts[b];
  }
  for (const auto& [image, boxes] : preds.images) {
    if (!image_pos.count(image)) {
      throw ReferentialError("prediction image_id " + std::to_string(image) +
                             " not found in ground truth");
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const auto& p = boxes[i];
      if (!gt.categories.contains(p.category_id)) {
        throw ReferentialError("prediction " + std::to_string(i) + " on image " +
                               std::to_string(image) + ": category_id " +
                               std::to_string(p.category_id) + " not found in ground truth");
      }
      if (!gt.categories.is_evaluated(p.category_id)) continue;
      const CategoryId b = bucket_of(p.category_id);
      auto& cell = cells[{image, b}];
      cell.image = image;
      cell.bucket = b;
      cell.dets.push_back({i, p.category_id, p.score, p.bbox});
    }
  }
  out.cells.reserve(cells.size());
  for (auto& [key, cell] : cells) {
    std::sort(cell.gt.begin(), cell.gt.end(),
              [](const Annotation* a, const Annotation* b) { return a->id < b->id; });
    std::stable_sort(cell.dets.begin(), cell.dets.end(),
                     [](const EvalDet& a, const EvalDet& b) { return a.score > b.score; });
    if (cell.dets.size() > max_dets) cell.dets.resize(max_dets);
    out.pred_counts[cell.bucket] += cell.dets.size();
    out.cells.push_back(std::move(cell));
  }
  return out;
}

// Per detection, the index into cell.gt it claimed (or -1).
inline std::vector<std::ptrdiff_t> greedy_match(const EvalCell& cell, double threshold) {
  std::vector<std::ptrdiff_t> claimed(cell.dets.size(), -1);
  std::vector<bool> taken(cell.gt.size(), false);
  for (std::size_t d = 0; d < cell.dets.size(); ++d) {
    std::ptrdiff_t best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < cell.gt.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(cell.dets[d].bbox, cell.gt[g]->bbox);
      if (v < threshold) continue;
      if (best < 0 || v > best_iou) {
        best = static_cast<std::ptrdiff_t>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      claimed[d] = best;
    }
  }
  return claimed;
}

inline void append_cell_matches(const EvalCell& cell, const std::vector<std::ptrdiff_t>& claimed,
                                MatchResult& out) {
  auto& dets = out.detections[cell.bucket];
  std::vector<bool> used(cell.gt.size(), false);
  for (std::size_t d = 0; d < cell.dets.size(); ++d) {
    DetectionMatch m{cell.image, cell.dets[d].category, cell.dets[d].pred_index,
                     cell.dets[d].score, std::nullopt};
    if (claimed[d] >= 0) {
      used[static_cast<std::size_t>(claimed[d])] = true;
      m.gt_id = cell.gt[static_cast<std::size_t>(claimed[d])]->id;
    }
    dets.push_back(m);
  }
  auto& miss = out.unmatched[cell.bucket];
  for (std::size_t g = 0; g < cell.gt.size(); ++g) {
    if (!used[g]) miss.push_back({cell.image, cell.gt[g]->category_id, cell.gt[g]->id});
  }
}

inline MatchResult match_prepared(const PreparedEval& prep, double threshold, EvalMode mode,
                                  std::size_t jobs) {
  std::vector<std::vector<std::ptrdiff_t>> claims(prep.cells.size());
  parallel_for(prep.cells.size(), jobs,
               [&](std::size_t i) { claims[i] = greedy_match(prep.cells[i], threshold); });
  MatchResult out;
  out.threshold = threshold;
  out.mode = mode;
  out.gt_counts = prep.gt_counts;
  for (std::size_t i = 0; i < prep.cells.size(); ++i) append_cell_matches(prep.cells[i], claims[i], out);
  return out;
}

}  // namespace detail

inline MatchResult match_detections(const Dataset& gt, const PredictionSet& preds, double threshold,
                                    EvalMode mode, std::size_t max_detections = 2000) {
  const auto prep = detail::prepare_eval(gt, preds, mode, max_detections);
  return detail::match_prepared(prep, threshold, mode, 1);
}

// Interpolated AP of one bucket at one threshold. Detections are pooled over
// images and ranked by score (ties: image id, then input order). Returns
// nullopt when there is neither ground truth nor any detection.
inline std::optional<double> average_precision(std::span<const DetectionMatch> detections,
                                               std::size_t gt_count,
                                               std::size_t recall_sample_points = 101) {
  if (recall_sample_points < 2) throw RangeError("recall_sample_points must be at least 2");
  if (gt_count == 0) {
    if (detections.empty()) return std::nullopt;
    return 0.0;
  }
  std::vector<DetectionMatch> ranked(detections.begin(), detections.end());
  std::sort(ranked.begin(), ranked.end(), [](const DetectionMatch& a, const DetectionMatch& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.pred_index < b.pred_index;
  });

  const std::size_t n = ranked.size();
  std::vector<std::size_t> tp_cum(n);
  std::vector<double> envelope(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += ranked[i].gt_id.has_value();
    tp_cum[i] = tp;
    envelope[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (std::size_t i = n; i-- > 1;) envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);

  // Recall level k / (S - 1) is reached at rank i iff tp_cum[i] * (S - 1) >= k * gt.
  const std::size_t steps = recall_sample_points - 1;
  double sum = 0.0;
  std::size_t i = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    while (i < n && tp_cum[i] * steps < k * gt_count) ++i;
    if (i == n) break;
    sum += envelope[i];
  }
  return sum / static_cast<double>(recall_sample_points);
}

// Fraction of ground truth matched; nullopt without ground truth.
inline std::optional<double> recall_of(std::span<const DetectionMatch> detections, std::size_t gt_count) {
  if (gt_count == 0) return std::nullopt;
  std::size_t tp = 0;
  for (const auto& d : detections) tp += d.gt_id.has_value();
  return static_cast<double>(tp) / static_cast<double>(gt_count);
}

struct ClassReport {
  CategoryId category_id = 0;
  std::string name;
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
  std::vector<std::optional<double>> ap;      // aligned with EvalReport::thresholds
  std::vector<std::optional<double>> recall;  // aligned with EvalReport::thresholds
  std::optional<double> mean_ap;
  std::optional<double> ap50, ap75, ar50, ar75;
};

struct ThresholdSummary {
  double threshold = 0.0;
  double ap = 0.0;
  double ar = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct EvalReport {
  EvalMode mode = EvalMode::recognition;
  std::vector<double> thresholds;
  std::size_t max_detections = 0;
  std::size_t recall_sample_points = 0;
  double mAP = 0.0;
  double mAR = 0.0;
  double AP50 = 0.0, AP75 = 0.0, AR50 = 0.0, AR75 = 0.0;
  std::vector<ThresholdSummary> per_threshold;
  std::vector<ClassReport> per_class;
  std::vector<std::string> notes;
};

namespace detail {

inline double mean_defined(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

inline std::optional<double> mean_or_none(const std::vector<std::optional<double>>& v) {
  bool any = std::any_of(v.begin(), v.end(), [](const auto& x) { return x.has_value(); });
  if (!any) return std::nullopt;
  return mean_defined(v);
}

}  // namespace detail

// Full report. mAP averages AP over buckets, then over thresholds; buckets
// with neither ground truth nor detections are left out. AR at a threshold is
// the mean over buckets with ground truth of the matched fraction.
// AP50/AP75/AR50/AR75 are always computed at 0.5 and 0.75.
inline EvalReport evaluate(const Dataset& gt, const PredictionSet& preds, const EvalConfig& cfg = {},
                           std::size_t jobs = 1) {
  cfg.validate();
  const auto prep = detail::prepare_eval(gt, preds, cfg.mode, cfg.max_detections);

  std::vector<CategoryId> buckets;
  if (cfg.mode == EvalMode::detection) {
    buckets.push_back(kAllCategories);
  } else {
    buckets = gt.categories.evaluated_ids();
  }

  std::vector<double> all_thresholds = cfg.iou_thresholds;
  for (double extra : {0.5, 0.75}) {
    if (std::find(all_thresholds.begin(), all_thresholds.end(), extra) == all_thresholds.end()) {
      all_thresholds.push_back(extra);
    }
  }

  // ap[t][b], rc[t][b]
  std::vector<std::vector<std::optional<double>>> ap(all_thresholds.size());
  std::vector<std::vector<std::optional<double>>> rc(all_thresholds.size());
  EvalReport report;
  report.mode = cfg.mode;
  report.thresholds = cfg.iou_thresholds;
  report.max_detections = cfg.max_detections;
  report.recall_sample_points = cfg.recall_sample_points;

  const std::vector<DetectionMatch> kNoDetections;
  for (std::size_t ti = 0; ti < all_thresholds.size(); ++ti) {
    const MatchResult m = detail::match_prepared(prep, all_thresholds[ti], cfg.mode, jobs);
    for (CategoryId b : buckets) {
      auto it = m.detections.find(b);
      const auto& dets = it == m.detections.end() ? kNoDetections : it->second;
      auto gc = m.gt_counts.find(b);
      const std::size_t gt_count = gc == m.gt_counts.end() ? 0 : gc->second;
      ap[ti].push_back(average_precision(dets, gt_count, cfg.recall_sample_points));
      rc[ti].push_back(recall_of(dets, gt_count));
    }
    if (ti < cfg.iou_thresholds.size()) {
      report.per_threshold.push_back({all_thresholds[ti], detail::mean_defined(ap[ti]),
                                      detail::mean_defined(rc[ti]), m.true_positives(),
                                      m.false_positives(), m.false_negatives()});
    }
  }

  const auto index_of = [&](double t) {
    return static_cast<std::size_t>(
        std::find(all_thresholds.begin(), all_thresholds.end(), t) - all_thresholds.begin());
  };
  const std::size_t i50 = index_of(0.5);
  const std::size_t i75 = index_of(0.75);

  double ap_sum = 0.0, ar_sum = 0.0;
  for (std::size_t ti = 0; ti < cfg.iou_thresholds.size(); ++ti) {
    ap_sum += report.per_threshold[ti].ap;
    ar_sum += report.per_threshold[ti].ar;
  }
  const auto nt = static_cast<double>(cfg.iou_thresholds.size());
  report.mAP = ap_sum / nt;
  report.mAR = ar_sum / nt;
  report.AP50 = detail::mean_defined(ap[i50]);
  report.AP75 = detail::mean_defined(ap[i75]);
  report.AR50 = detail::mean_defined(rc[i50]);
  report.AR75 = detail::mean_defined(rc[i75]);

  for (std::size_t bi = 0; bi < buckets.size(); ++bi) {
    ClassReport c;
    c.category_id = buckets[bi];
    if (cfg.mode == EvalMode::detection) {
      c.name = "*";
    } else if (const Category* cat = gt.categories.find(buckets[bi])) {
      c.name = cat->name;
    }
    auto g = prep.gt_counts.find(buckets[bi]);
    c.gt_count = g == prep.gt_counts.end() ? 0 : g->second;
    auto p = prep.pred_counts.find(buckets[bi]);
    c.pred_count = p == prep.pred_counts.end() ? 0 : p->second;
    for (std::size_t ti = 0; ti < cfg.iou_thresholds.size(); ++ti) {
      c.ap.push_back(ap[ti][bi]);
      c.recall.push_back(rc[ti][bi]);
    }
    c.mean_ap = detail::mean_or_none(c.ap);
    c.ap50 = ap[i50][bi];
    c.ap75 = ap[i75][bi];
    c.ar50 = rc[i50][bi];
    c.ar75 = rc[i75][bi];
    report.per_class.push_back(std::move(c));
  }

  report.notes.push_back("AP: " + std::to_string(cfg.recall_sample_points) +
                         "-point interpolated precision envelope");
  report.notes.push_back("AR: matched fraction of ground truth using at most " +
                         std::to_string(cfg.max_detections) +
                         " top-scored detections per image and bucket, averaged over buckets");
  report.notes.push_back("punctuation categories excluded from scoring");
  return report;
}

// Rows are ground-truth categories, columns predicted categories; the last
// row / column ("missed") collects unmatched predictions / ground truth.
struct ConfusionMatrix {
  double threshold = 0.5;
  std::vector<CategoryId> labels;
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t missed_index() const { return labels.size(); }
  std::size_t index_of(CategoryId id) const {
    auto it = std::find(labels.begin(), labels.end(), id);
    return static_cast<std::size_t>(it - labels.begin());
  }
  std::size_t at(CategoryId gt, CategoryId pred) const { return counts[index_of(gt)][index_of(pred)]; }
  std::size_t missed_truth(CategoryId gt) const { return counts[index_of(gt)][missed_index()]; }
  std::size_t spurious(CategoryId pred) const { return counts[missed_index()][index_of(pred)]; }
};

// Class-agnostic greedy matching at `threshold`, then tallies
// (ground-truth class, predicted class) pairs.
inline ConfusionMatrix confusion(const Dataset& gt, const PredictionSet& preds, double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw RangeError("IoU threshold must lie in (0, 1]");
  const auto prep =
      detail::prepare_eval(gt, preds, EvalMode::detection, std::numeric_limits<std::size_t>::max());
  ConfusionMatrix cm;
  cm.threshold = threshold;
  cm.labels = gt.categories.evaluated_ids();
  for (CategoryId id : cm.labels) cm.names.push_back(gt.categories.find(id)->name);
  const std::size_t k = cm.labels.size();
  cm.counts.assign(k + 1, std::vector<std::size_t>(k + 1, 0));

  for (const auto& cell : prep.cells) {
    const auto claimed = detail::greedy_match(cell, threshold);
    std::vector<bool> used(cell.gt.size(), false);
    for (std::size_t d = 0; d < cell.dets.size(); ++d) {
      const std::size_t col = cm.index_of(cell.dets[d].category);
      if (claimed[d] >= 0) {
        const auto g = static_cast<std::size_t>(claimed[d]);
        used[g] = true;
        ++cm.counts[cm.index_of(cell.gt[g]->category_id)][col];
      } else {
        ++cm.counts[k][col];
      }
    }
    for (std::size_t g = 0; g < cell.gt.size(); ++g) {
      if (!used[g]) ++cm.counts[cm.index_of(cell.gt[g]->category_id)][k];
    }
  }
  return cm;
}

inline Json to_json(const EvalReport& r, const ConfusionMatrix* cm = nullptr) {
  const auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j = Json::object();
  j["mode"] = to_string(r.mode);
  j["mAP"] = r.mAP;
  j["AP50"] = r.AP50;
  j["AP75"] = r.AP75;
  j["AR50"] = r.AR50;
  j["AR75"] = r.AR75;
  j["mAR"] = r.mAR;
  j["iou_thresholds"] = r.thresholds;
  j["max_detections"] = r.max_detections;
  j["recall_sample_points"] = r.recall_sample_points;
  Json per_t = Json::array();
  for (const auto& t : r.per_threshold) {
    per_t.push_back(Json::object(
        {{"iou", t.threshold}, {"AP", t.ap}, {"AR", t.ar}, {"tp", t.tp}, {"fp", t.fp}, {"fn", t.fn}}));
  }
  j["per_threshold"] = std::move(per_t);
  Json per_c = Json::object();
  for (const auto& c : r.per_class) {
    Json ap = Json::array();
    for (const auto& v : c.ap) ap.push_back(opt(v));
    per_c[c.name] = Json::object({{"id", c.category_id},
                                  {"gt", c.gt_count},
                                  {"pred", c.pred_count},
                                  {"AP", opt(c.mean_ap)},
                                  {"AP50", opt(c.ap50)},
                                  {"AP75", opt(c.ap75)},
                                  {"AR50", opt(c.ar50)},
                                  {"AR75", opt(c.ar75)},
                                  {"AP_per_iou", std::move(ap)}});
  }
  j["per_class"] = std::move(per_c);
  if (cm != nullptr) {
    Json labels = Json::array();
    for (const auto& n : cm->names) labels.push_back(n);
    labels.push_back("missed");
    j["confusion_iou"] = cm->threshold;
    j["confusion_labels"] = std::move(labels);
    j["confusion"] = cm->counts;
  }
  j["notes"] = r.notes;
  return j;
}

inline std::string format_report(const EvalReport& r) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf, "mode: %s  (max detections %zu, %zu recall points)\n",
                to_string(r.mode), r.max_detections, r.recall_sample_points);
  out += buf;
  std::snprintf(buf, sizeof buf, "mAP   %.4f\nAP50  %.4f\nAP75  %.4f\nmAR   %.4f\nAR50  %.4f\nAR75  %.4f\n",
                r.mAP, r.AP50, r.AP75, r.mAR, r.AR50, r.AR75);
  out += buf;
  out += "\n  IoU      AP      AR      TP      FP      FN\n";
  for (const auto& t : r.per_threshold) {
    std::snprintf(buf, sizeof buf, "  %.2f  %.4f  %.4f  %6zu  %6zu  %6zu\n", t.threshold, t.ap, t.ar,
                  t.tp, t.fp, t.fn);
    out += buf;
  }
  if (r.mode == EvalMode::recognition) {
    out += "\n  class     gt   pred      AP    AP50    AR50\n";
    for (const auto& c : r.per_class) {
      const auto f = [](const std::optional<double>& v) {
        char b[16];
        if (v) {
          std::snprintf(b, sizeof b, "%6.4f", *v);
        } else {
          std::snprintf(b, sizeof b, "%6s", "-");
        }
        return std::string(b);
      };
      // Names are UTF-8; pad by hand rather than trusting printf widths.
      std::string name = c.name;
      const std::size_t width = utf8::decode(name).size();
      if (width < 6) name.append(6 - width, ' ');
      std::snprintf(buf, sizeof buf, "  %s %5zu  %5zu  %s  %s  %s\n", name.c_str(), c.gt_count,
                    c.pred_count, f(c.mean_ap).c_str(), f(c.ap50).c_str(), f(c.ar50).c_str());
      out += buf;
    }
  }
  return out;
}

}  // namespace papyri
