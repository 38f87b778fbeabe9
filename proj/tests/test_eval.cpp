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


#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.hpp"

namespace papyri {
namespace {

constexpr CategoryId kAlpha = 1;
constexpr CategoryId kBeta = 2;
constexpr CategoryId kLambda = 11;
constexpr CategoryId kPeriod = 26;

Dataset Truth(std::initializer_list<std::pair<Box, CategoryId>> boxes, ImageId image = 1) {
  Dataset ds;
  ds.categories = CategoryTable::greek_default();
  ds.images.push_back({image, "page.png", 500, 500, Json::object()});
  AnnotationId id = 1;
  for (const auto& [b, c] : boxes) ds.annotations.push_back({id++, image, c, b, Json::object()});
  return ds;
}

PredictionSet Copy(const Dataset& ds, double score = 1.0) {
  PredictionSet p;
  for (const auto& a : ds.annotations) p.add(a.image_id, {a.bbox, a.category_id, score});
  return p;
}

EvalConfig Mode(EvalMode m) {
  EvalConfig cfg;
  cfg.mode = m;
  return cfg;
}

TEST(ThresholdsTest, CocoGrid) {
  const auto t = coco_iou_thresholds();
  ASSERT_EQ(t.size(), 10u);
  EXPECT_EQ(t.front(), 0.5);
  EXPECT_EQ(t[5], 0.75);
  EXPECT_EQ(t.back(), 0.95);
}

TEST(EvalConfigTest, Validation) {
  EvalConfig cfg;
  cfg.iou_thresholds = {0.5, 0.5};
  EXPECT_THROW(cfg.validate(), RangeError);
  cfg.iou_thresholds = {0.0};
  EXPECT_THROW(cfg.validate(), RangeError);
  cfg.iou_thresholds = {0.5};
  cfg.max_detections = 0;
  EXPECT_THROW(cfg.validate(), RangeError);
  EXPECT_THROW(parse_eval_mode("segm"), RangeError);
}

TEST(MatchTest, IdentityAllMatched) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}, {Box{20, 0, 10, 10}, kBeta}});
  for (double t : coco_iou_thresholds()) {
    const auto m = match_detections(gt, Copy(gt), t, EvalMode::recognition);
    EXPECT_EQ(m.true_positives(), 2u);
    EXPECT_EQ(m.false_positives(), 0u);
    EXPECT_EQ(m.false_negatives(), 0u);
  }
}

TEST(MatchTest, NoPredictions) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}, {Box{20, 0, 10, 10}, kBeta}});
  const auto m = match_detections(gt, PredictionSet{}, 0.5, EvalMode::detection);
  EXPECT_EQ(m.false_negatives(), 2u);
  EXPECT_EQ(m.true_positives(), 0u);
}

TEST(MatchTest, HigherScoreWins) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}});
  PredictionSet p;
  p.add(1, {Box{0, 0, 10, 10}, kAlpha, 0.8});
  p.add(1, {Box{0, 0, 10, 10}, kAlpha, 0.9});
  const auto m = match_detections(gt, p, 0.5, EvalMode::recognition);
  const auto& d = m.detections.at(kAlpha);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].pred_index, 1u);
  EXPECT_TRUE(d[0].gt_id.has_value());
  EXPECT_FALSE(d[1].gt_id.has_value());
}

TEST(MatchTest, IouTieGoesToLowerGtId) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}, {Box{0, 0, 10, 10}, kAlpha}});
  PredictionSet p;
  p.add(1, {Box{0, 0, 10, 10}, kAlpha, 0.9});
  const auto m = match_detections(gt, p, 0.5, EvalMode::recognition);
  EXPECT_EQ(*m.detections.at(kAlpha)[0].gt_id, 1);
  EXPECT_EQ(m.unmatched.at(kAlpha)[0].id, 2);
}

TEST(MatchTest, ModeControlsClassRequirement) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}});
  PredictionSet p;
  p.add(1, {Box{0, 0, 10, 10}, kLambda, 0.9});
  EXPECT_EQ(match_detections(gt, p, 0.5, EvalMode::recognition).true_positives(), 0u);
  EXPECT_EQ(match_detections(gt, p, 0.5, EvalMode::detection).true_positives(), 1u);
}

TEST(MatchTest, PunctuationIgnored) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}, {Box{20, 0, 3, 3}, kPeriod}});
  PredictionSet p;
  p.add(1, {Box{0, 0, 10, 10}, kAlpha, 0.9});
  p.add(1, {Box{50, 0, 3, 3}, kPeriod, 0.9});
  const auto m = match_detections(gt, p, 0.5, EvalMode::detection);
  EXPECT_EQ(m.true_positives(), 1u);
  EXPECT_EQ(m.false_positives(), 0u);
  EXPECT_EQ(m.false_negatives(), 0u);
}

TEST(MatchTest, DanglingIds) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}});
  PredictionSet wrong_image;
  wrong_image.add(4, {Box{0, 0, 10, 10}, kAlpha, 0.9});
  EXPECT_THROW(match_detections(gt, wrong_image, 0.5, EvalMode::recognition), ReferentialError);
  PredictionSet wrong_class;
  wrong_class.add(1, {Box{0, 0, 10, 10}, 404, 0.9});
  EXPECT_THROW(match_detections(gt, wrong_class, 0.5, EvalMode::recognition), ReferentialError);
}

DetectionMatch Det(double score, bool tp, std::size_t index = 0) {
  return DetectionMatch{1, kAlpha, index, score, tp ? std::optional<AnnotationId>(1) : std::nullopt};
}

TEST(AveragePrecisionTest, PerfectRanking) {
  const std::vector<DetectionMatch> d{Det(0.9, true, 0), Det(0.8, true, 1), Det(0.1, false, 2)};
  EXPECT_EQ(*average_precision(d, 2), 1.0);
}

TEST(AveragePrecisionTest, FalsePositiveThenTruePositive) {
  const std::vector<DetectionMatch> d{Det(0.9, false, 0), Det(0.8, true, 1)};
  EXPECT_EQ(*average_precision(d, 1), 0.5);
}

TEST(AveragePrecisionTest, EmptyCases) {
  EXPECT_EQ(*average_precision({}, 3), 0.0);
  const std::vector<DetectionMatch> d{Det(0.9, false)};
  EXPECT_EQ(*average_precision(d, 0), 0.0);
  EXPECT_FALSE(average_precision({}, 0).has_value());
}

TEST(AveragePrecisionTest, PartialRecall) {
  // 1 of 2 found at rank 1: recall levels 0..0.5 get precision 1.
  const std::vector<DetectionMatch> d{Det(0.9, true)};
  EXPECT_NEAR(*average_precision(d, 2), 51.0 / 101.0, 1e-15);
}

TEST(EvaluateTest, PerfectBothModes) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}, {Box{20, 0, 10, 10}, kBeta}, {Box{40, 0, 10, 10}, kAlpha}});
  for (auto mode : {EvalMode::detection, EvalMode::recognition}) {
    const EvalReport r = evaluate(gt, Copy(gt), Mode(mode));
    EXPECT_EQ(r.mAP, 1.0);
    EXPECT_EQ(r.AP50, 1.0);
    EXPECT_EQ(r.AP75, 1.0);
    EXPECT_EQ(r.AR50, 1.0);
    EXPECT_EQ(r.AR75, 1.0);
    EXPECT_EQ(r.mAR, 1.0);
  }
}

TEST(EvaluateTest, HalfRecall) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha},
                            {Box{20, 0, 10, 10}, kAlpha},
                            {Box{40, 0, 10, 10}, kAlpha},
                            {Box{60, 0, 10, 10}, kAlpha}});
  PredictionSet p;
  p.add(1, {Box{0, 0, 10, 10}, kAlpha, 0.9});
  p.add(1, {Box{40, 0, 10, 10}, kAlpha, 0.7});
  const EvalReport r = evaluate(gt, p);
  EXPECT_EQ(r.AR50, 0.5);
  EXPECT_EQ(r.AR75, 0.5);
  EXPECT_NEAR(r.AP50, 51.0 / 101.0, 1e-15);
}

TEST(EvaluateTest, MaxDetectionsPerImage) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}, {Box{20, 0, 10, 10}, kAlpha}});
  PredictionSet p = Copy(gt, 0.5);
  p.images[1][1].score = 0.4;
  EvalConfig cfg;
  cfg.max_detections = 1;
  EXPECT_EQ(evaluate(gt, p, cfg).AR50, 0.5);
}

TEST(EvaluateTest, JobsDoNotChangeResults) {
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const auto inst = testing_support::random_eval_instance(rng, 5, 8);
    const auto a = to_json(evaluate(inst.gt, inst.preds, {}, 1)).dump();
    const auto b = to_json(evaluate(inst.gt, inst.preds, {}, 4)).dump();
    ASSERT_EQ(a, b);
  }
}

TEST(EvaluateTest, MatchesReferenceScorer) {
  Rng rng(77);
  for (int i = 0; i < 150; ++i) {
    const auto inst = testing_support::random_eval_instance(rng, 5, 8);
    for (auto mode : {EvalMode::detection, EvalMode::recognition}) {
      const EvalReport r = evaluate(inst.gt, inst.preds, Mode(mode));
      const auto ref = testing_support::reference_for(inst, mode, coco_iou_thresholds());
      ASSERT_NEAR(r.mAP, ref.mAP, 1e-9);
      ASSERT_NEAR(r.mAR, ref.mAR, 1e-9);
      ASSERT_NEAR(r.AP50, ref.AP50, 1e-9);
      ASSERT_NEAR(r.AP75, ref.AP75, 1e-9);
      ASSERT_NEAR(r.AR50, ref.AR50, 1e-9);
      ASSERT_NEAR(r.AR75, ref.AR75, 1e-9);
    }
  }
}

TEST(EvaluateTest, RandomInvariants) {
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const auto inst = testing_support::random_eval_instance(rng, 5, 8);
    for (auto mode : {EvalMode::detection, EvalMode::recognition}) {
      const EvalReport r = evaluate(inst.gt, inst.preds, Mode(mode));
      for (double v : {r.mAP, r.mAR, r.AP50, r.AP75, r.AR50, r.AR75}) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
      }
      ASSERT_GE(r.AP50 + 1e-12, r.mAP);
      ASSERT_GE(r.mAP + 1e-12, r.per_threshold.back().ap / static_cast<double>(r.per_threshold.size()));
      for (std::size_t t = 1; t < r.per_threshold.size(); ++t) {
        ASSERT_GE(r.per_threshold[t - 1].ap + 1e-12, r.per_threshold[t].ap);
      }

      // Ranking-only dependence.
      PredictionSet squashed = inst.preds;
      for (auto& [image, boxes] : squashed.images) {
        for (auto& b : boxes) b.score = std::sqrt(b.score) * 0.5;
      }
      ASSERT_NEAR(evaluate(inst.gt, squashed, Mode(mode)).mAP, r.mAP, 1e-12);
    }
  }
}

TEST(EvaluateTest, FalsePositiveEffects) {
  Rng rng(5);
  EvalConfig cfg = Mode(EvalMode::detection);
  cfg.iou_thresholds = {0.5};
  for (int i = 0; i < 300; ++i) {
    auto inst = testing_support::random_eval_instance(rng, 3, 8);
    const double base = evaluate(inst.gt, inst.preds, cfg).mAP;

    // A far-away box ranked last.
    PredictionSet more = inst.preds;
    more.add(1, {Box{400, 400, 5, 5}, kAlpha, 0.0});
    ASSERT_LE(evaluate(inst.gt, more, cfg).mAP, base + 1e-12);

    // Drop one detection that is a false positive at 0.5.
    const auto m = match_detections(inst.gt, inst.preds, 0.5, EvalMode::detection);
    auto it = m.detections.find(kAllCategories);
    if (it == m.detections.end()) continue;
    for (const auto& d : it->second) {
      if (d.gt_id) continue;
      PredictionSet fewer = inst.preds;
      auto& boxes = fewer.images[d.image_id];
      boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(d.pred_index));
      ASSERT_GE(evaluate(inst.gt, fewer, cfg).mAP + 1e-12, base);
      break;
    }
  }
}

TEST(EvaluateTest, ReportJsonShape) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}});
  const EvalReport r = evaluate(gt, Copy(gt));
  const ConfusionMatrix cm = confusion(gt, Copy(gt));
  const Json j = to_json(r, &cm);
  for (const char* key : {"mAP", "AP50", "AP75", "AR50", "AR75", "per_class", "confusion"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["per_class"]["Α"]["AP"], 1.0);
  EXPECT_TRUE(j["per_class"]["Β"]["AP"].is_null());
  EXPECT_FALSE(format_report(r).empty());
}

TEST(ConfusionTest, Examples) {
  const Dataset gt = Truth({{Box{0, 0, 10, 10}, kAlpha}, {Box{20, 0, 10, 10}, kBeta}});
  const ConfusionMatrix perfect = confusion(gt, Copy(gt));
  ASSERT_EQ(perfect.counts.size(), 25u);
  EXPECT_EQ(perfect.at(kAlpha, kAlpha), 1u);
  EXPECT_EQ(perfect.at(kBeta, kBeta), 1u);
  std::size_t off = 0;
  for (std::size_t r = 0; r < 25; ++r) {
    for (std::size_t c = 0; c < 25; ++c) off += r == c ? 0 : perfect.counts[r][c];
  }
  EXPECT_EQ(off, 0u);

  const Dataset one = Truth({{Box{0, 0, 10, 10}, kAlpha}});
  PredictionSet wrong;
  wrong.add(1, {Box{0, 0, 10, 9}, kLambda, 0.9});  // IoU 0.9
  EXPECT_EQ(confusion(one, wrong).at(kAlpha, kLambda), 1u);
  EXPECT_EQ(confusion(one, PredictionSet{}).missed_truth(kAlpha), 1u);

  PredictionSet stray;
  stray.add(1, {Box{100, 100, 10, 10}, kBeta, 0.9});
  EXPECT_EQ(confusion(one, stray).spurious(kBeta), 1u);
}

TEST(ConfusionTest, RowSumsAreTruthCounts) {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const auto inst = testing_support::random_eval_instance(rng, 5, 8);
    const ConfusionMatrix cm = confusion(inst.gt, inst.preds, 0.5);
    for (std::size_t r = 0; r < cm.labels.size(); ++r) {
      std::size_t sum = 0;
      for (std::size_t v : cm.counts[r]) sum += v;
      std::size_t truth = 0;
      for (const auto& a : inst.gt.annotations) truth += a.category_id == cm.labels[r];
      ASSERT_EQ(sum, truth);
    }
  }
}

}  // namespace
}  // namespace papyri
