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

// Recognition ensembling.
//
// Every fused detection is re-classified by several recognizer families
// (each itself an ensemble of cross-validation members). A family reduces its
// members to one verdict by hard majority vote; the detector's own label is
// one more voter. The box is then split into one box per distinct voted
// label, each carrying the detection score times that label's vote share.

#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "papyri/coco.hpp"
#include "papyri/error.hpp"
#include "papyri/fusion.hpp"

namespace papyri {

struct RecognizerOutput {
  CategoryId label = 0;
  double confidence = 0.0;
  std::string family;

  friend bool operator==(const RecognizerOutput&, const RecognizerOutput&) = default;
};

// The members of one family voting on one box.
using MemberVotes = std::vector<RecognizerOutput>;

class VoteTally {
 public:
  struct Entry {
    CategoryId label = 0;
    std::size_t votes = 0;
    double mean_confidence = 0.0;
  };

  void add(CategoryId label, double confidence) {
    auto& s = slots_[label];
    s.votes += 1;
    s.confidence_sum += confidence;
    total_ += 1;
  }

  std::size_t total() const { return total_; }
  std::size_t distinct() const { return slots_.size(); }

  // Most votes first; ties by higher mean confidence, then lower label.
  std::vector<Entry> ranked() const {
    std::vector<Entry> out;
    out.reserve(slots_.size());
    for (const auto& [label, s] : slots_) {
      out.push_back({label, s.votes, s.confidence_sum / static_cast<double>(s.votes)});
    }
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
      if (a.votes != b.votes) return a.votes > b.votes;
      if (a.mean_confidence != b.mean_confidence) return a.mean_confidence > b.mean_confidence;
      return a.label < b.label;
    });
    return out;
  }

 private:
  struct Slot {
    std::size_t votes = 0;
    double confidence_sum = 0.0;
  };
  std::map<CategoryId, Slot> slots_;
  std::size_t total_ = 0;
};

// Hard majority vote within one family. The winner's confidence is the mean
// confidence of the members that voted for it.
inline RecognizerOutput majority_vote(std::span<const RecognizerOutput> members) {
  if (members.empty()) throw std::invalid_argument("majority_vote needs at least one member");
  VoteTally tally;
  for (const auto& m : members) {
    if (!(m.confidence >= 0.0 && m.confidence <= 1.0)) {
      throw RangeError("recognizer confidence outside [0, 1]");
    }
    tally.add(m.label, m.confidence);
  }
  const auto best = tally.ranked().front();
  return RecognizerOutput{best.label, best.mean_confidence, members.front().family};
}

// Splits `box` by vote share. The detector's label votes with the box score
// as its confidence; each entry of `family_votes` is one more vote.
inline std::vector<ScoredBox> vote_adjusted_boxes(const ScoredBox& box,
                                                  std::span<const RecognizerOutput> family_votes) {
  if (!(box.score >= 0.0 && box.score <= 1.0)) throw RangeError("box score outside [0, 1]");
  VoteTally tally;
  tally.add(box.category_id, box.score);
  for (const auto& v : family_votes) tally.add(v.label, v.confidence);

  const auto total = static_cast<double>(tally.total());
  std::vector<ScoredBox> out;
  for (const auto& e : tally.ranked()) {
    out.push_back(ScoredBox{box.bbox, e.label, box.score * static_cast<double>(e.votes) / total});
  }
  return out;
}

inline std::vector<ScoredBox> vote_adjusted_boxes(const FusedBox& box,
                                                  std::span<const RecognizerOutput> family_votes) {
  return vote_adjusted_boxes(box.as_scored(), family_votes);
}

// Per-image ensembling. `families[f][i]` holds family f's member votes for
// boxes[i]; an empty member list means that family abstains on the box.
inline std::vector<ScoredBox> ensemble_recognition(std::span<const ScoredBox> boxes,
                                                   std::span<const std::vector<MemberVotes>> families) {
  for (std::size_t f = 0; f < families.size(); ++f) {
    if (families[f].size() != boxes.size()) {
      throw AlignmentError("recognizer family " + std::to_string(f) + " has " +
                           std::to_string(families[f].size()) + " entries for " +
                           std::to_string(boxes.size()) + " boxes");
    }
  }
  std::vector<ScoredBox> out;
  std::vector<RecognizerOutput> verdicts;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    verdicts.clear();
    for (const auto& family : families) {
      if (!family[i].empty()) verdicts.push_back(majority_vote(family[i]));
    }
    auto split = vote_adjusted_boxes(boxes[i], verdicts);
    out.insert(out.end(), split.begin(), split.end());
  }
  return out;
}

inline std::vector<ScoredBox> ensemble_recognition(std::span<const FusedBox> fused,
                                                   std::span<const std::vector<MemberVotes>> families) {
  std::vector<ScoredBox> boxes;
  boxes.reserve(fused.size());
  for (const auto& f : fused) boxes.push_back(f.as_scored());
  return ensemble_recognition(std::span<const ScoredBox>(boxes), families);
}

// Whole-set ensembling. Family entries align with the canonical record order
// of `fused` (image id ascending, then record order within the image).
inline PredictionSet ensemble_recognition(const PredictionSet& fused,
                                          std::span<const std::vector<MemberVotes>> families) {
  const std::size_t n = fused.size();
  for (std::size_t f = 0; f < families.size(); ++f) {
    if (families[f].size() != n) {
      throw AlignmentError("recognizer family " + std::to_string(f) + " has " +
                           std::to_string(families[f].size()) + " entries for " +
                           std::to_string(n) + " fused boxes");
    }
  }
  PredictionSet out;
  std::size_t offset = 0;
  for (const auto& [image, boxes] : fused.images) {
    std::vector<std::vector<MemberVotes>> slice(families.size());
    for (std::size_t f = 0; f < families.size(); ++f) {
      slice[f].assign(families[f].begin() + static_cast<std::ptrdiff_t>(offset),
                      families[f].begin() + static_cast<std::ptrdiff_t>(offset + boxes.size()));
    }
    auto split = ensemble_recognition(std::span<const ScoredBox>(boxes),
                                      std::span<const std::vector<MemberVotes>>(slice));
    auto& dst = out.images[image];
    dst.insert(dst.end(), split.begin(), split.end());
    offset += boxes.size();
  }
  return out;
}

// Recognizer-output file: a JSON array with one element per fused box,
// `{"family": tag, "labels": [category_id per member], "confidences": [...]}`.
// `confidences` may be omitted (members then vote with confidence 1).
inline std::vector<MemberVotes> recognizer_outputs_from_json(const Json& root,
                                                             const std::string& context = "recognizer") {
  if (!root.is_array()) throw SchemaError(context + ": must be a JSON array");
  std::vector<MemberVotes> out;
  out.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const Json& e = root[i];
    const std::string ctx = context + ": element " + std::to_string(i);
    if (!e.is_object()) throw SchemaError(ctx + ": must be an object");
    const Json& labels = detail::require(e, "labels", ctx);
    if (!labels.is_array()) throw SchemaError(ctx + ": 'labels' must be an array");
    std::string family;
    if (auto it = e.find("family"); it != e.end()) {
      if (!it->is_string()) throw SchemaError(ctx + ": 'family' must be a string");
      family = it->get<std::string>();
    }
    const Json* confs = nullptr;
    if (auto it = e.find("confidences"); it != e.end()) {
      if (!it->is_array() || it->size() != labels.size()) {
        throw SchemaError(ctx + ": 'confidences' must be an array as long as 'labels'");
      }
      confs = &*it;
    }
    MemberVotes members;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (!labels[k].is_number_integer()) throw SchemaError(ctx + ": labels must be integers");
      double c = 1.0;
      if (confs != nullptr) {
        if (!(*confs)[k].is_number()) throw SchemaError(ctx + ": confidences must be numbers");
        c = (*confs)[k].get<double>();
        if (!(c >= 0.0 && c <= 1.0)) throw RangeError(ctx + ": confidence outside [0, 1]");
      }
      members.push_back({labels[k].get<CategoryId>(), c, family});
    }
    out.push_back(std::move(members));
  }
  return out;
}

inline Json to_json(std::span<const MemberVotes> outputs) {
  Json out = Json::array();
  for (const auto& members : outputs) {
    Json labels = Json::array();
    Json confs = Json::array();
    for (const auto& m : members) {
      labels.push_back(m.label);
      confs.push_back(m.confidence);
    }
    Json e = Json::object();
    e["family"] = members.empty() ? std::string() : members.front().family;
    e["labels"] = std::move(labels);
    e["confidences"] = std::move(confs);
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<MemberVotes> load_recognizer_outputs(const std::filesystem::path& path) {
  const std::string ctx = path.string();
  return recognizer_outputs_from_json(detail::parse_json(detail::read_file(path), ctx), ctx);
}

}  // namespace papyri
