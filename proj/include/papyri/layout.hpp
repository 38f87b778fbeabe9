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

// Reading-order recovery for a page of character boxes.
//
// Each box is dilated ("feathered") by a fraction of its own width and
// height. Two boxes are linked when their feathered boxes overlap with
// positive area and their feathered vertical extents overlap by at least half
// of the smaller feathered height; text lines are the connected components of
// that relation. Paragraph breaks go where the gap between consecutive lines
// exceeds a multiple of the page's median line height.

#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "papyri/coco.hpp"
#include "papyri/error.hpp"
#include "papyri/geometry.hpp"

namespace papyri {

struct LayoutConfig {
  double feather_x = 0.4;
  double feather_y = 0.1;
  double paragraph_gap_factor = 1.8;

  void validate() const {
    if (!(feather_x >= 0.0) || !(feather_y >= 0.0) || !(paragraph_gap_factor >= 0.0)) {
      throw RangeError("layout parameters must be non-negative");
    }
  }
};

struct Line {
  std::vector<ScoredBox> boxes;  // left to right
  double top = 0.0;
  double bottom = 0.0;
  double height_median = 0.0;
  double center_y = 0.0;  // mean vertical center of the boxes

  friend bool operator==(const Line&, const Line&) = default;
};

struct Paragraph {
  std::vector<Line> lines;

  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

struct PageLayout {
  std::vector<Paragraph> paragraphs;

  std::size_t line_count() const {
    std::size_t n = 0;
    for (const auto& p : paragraphs) n += p.lines.size();
    return n;
  }
  std::size_t box_count() const {
    std::size_t n = 0;
    for (const auto& p : paragraphs) {
      for (const auto& l : p.lines) n += l.boxes.size();
    }
    return n;
  }

  friend bool operator==(const PageLayout&, const PageLayout&) = default;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

inline bool same_line(const Box& a, const Box& b) {
  if (intersection_area(a, b) <= 0.0) return false;
  return vertical_overlap(a, b) >= 0.5 * std::min(a.h, b.h);
}

inline Line make_line(std::vector<std::pair<std::size_t, ScoredBox>> members) {
  std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) {
    if (a.second.bbox.x != b.second.bbox.x) return a.second.bbox.x < b.second.bbox.x;
    if (a.second.bbox.y != b.second.bbox.y) return a.second.bbox.y < b.second.bbox.y;
    return a.first < b.first;
  });
  Line line;
  std::vector<double> heights;
  double center_sum = 0.0;
  line.top = members.front().second.bbox.top();
  line.bottom = members.front().second.bbox.bottom();
  for (const auto& [idx, b] : members) {
    line.boxes.push_back(b);
    line.top = std::min(line.top, b.bbox.top());
    line.bottom = std::max(line.bottom, b.bbox.bottom());
    heights.push_back(b.bbox.h);
    center_sum += b.bbox.center_y();
  }
  line.height_median = median(std::move(heights));
  line.center_y = center_sum / static_cast<double>(line.boxes.size());
  return line;
}

}  // namespace detail

// Groups boxes into text lines, sorted top to bottom by mean vertical center
// (ties: top edge, then left edge); boxes within a line run left to right.
inline std::vector<Line> cluster_lines(std::span<const ScoredBox> boxes, const LayoutConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = boxes.size();
  if (n == 0) return {};

  std::vector<Box> feathered(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_valid(boxes[i].bbox)) throw RangeError("layout input " + std::to_string(i) + ": invalid box");
    feathered[i] = feather(boxes[i].bbox, cfg.feather_x, cfg.feather_y);
  }

  // Sweep over feathered left edges; a pair can only link while the next
  // box starts before the current one ends.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (feathered[a].x != feathered[b].x) return feathered[a].x < feathered[b].x;
    return a < b;
  });
  detail::DisjointSets sets(n);
  for (std::size_t oi = 0; oi < n; ++oi) {
    const Box& a = feathered[order[oi]];
    for (std::size_t oj = oi + 1; oj < n; ++oj) {
      const Box& b = feathered[order[oj]];
      if (b.left() >= a.right()) break;
      if (detail::same_line(a, b)) sets.unite(order[oi], order[oj]);
    }
  }

  std::vector<std::vector<std::pair<std::size_t, ScoredBox>>> groups;
  std::vector<std::size_t> group_of_root(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = sets.find(i);
    if (group_of_root[r] == n) {
      group_of_root[r] = groups.size();
      groups.emplace_back();
    }
    groups[group_of_root[r]].emplace_back(i, boxes[i]);
  }

  std::vector<Line> lines;
  lines.reserve(groups.size());
  for (auto& g : groups) lines.push_back(detail::make_line(std::move(g)));
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.center_y != b.center_y) return a.center_y < b.center_y;
    if (a.top != b.top) return a.top < b.top;
    return a.boxes.front().bbox.x < b.boxes.front().bbox.x;
  });
  return lines;
}

// Splits top-to-bottom lines into paragraphs. A break goes between two
// consecutive lines when (next.top - current.bottom) exceeds
// paragraph_gap_factor times the median over lines of their median box height.
inline PageLayout cluster_paragraphs(std::vector<Line> lines, const LayoutConfig& cfg = {}) {
  cfg.validate();
  PageLayout page;
  if (lines.empty()) return page;

  std::vector<double> heights;
  heights.reserve(lines.size());
  for (const auto& l : lines) heights.push_back(l.height_median);
  const double limit = cfg.paragraph_gap_factor * detail::median(std::move(heights));

  page.paragraphs.emplace_back();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0 && lines[i].top - lines[i - 1].bottom > limit) page.paragraphs.emplace_back();
    page.paragraphs.back().lines.push_back(std::move(lines[i]));
  }
  return page;
}

inline PageLayout analyze_layout(std::span<const ScoredBox> boxes, const LayoutConfig& cfg = {}) {
  return cluster_paragraphs(cluster_lines(boxes, cfg), cfg);
}

// Layout file: `{"pages": [{"image_id", "document_id", "paragraphs":
// [{"lines": [{"top", "bottom", "height_median", "center_y",
// "boxes": [{"bbox", "category_id", "score"}]}]}]}]}`.
struct LayoutDocument {
  ImageId image_id = 0;
  std::string document_id;
  PageLayout layout;

  friend bool operator==(const LayoutDocument&, const LayoutDocument&) = default;
};

inline Json to_json(const PageLayout& page) {
  Json paragraphs = Json::array();
  for (const auto& p : page.paragraphs) {
    Json lines = Json::array();
    for (const auto& l : p.lines) {
      Json boxes = Json::array();
      for (const auto& b : l.boxes) {
        Json jb = Json::object();
        jb["bbox"] = detail::bbox_json(b.bbox);
        jb["category_id"] = b.category_id;
        jb["score"] = b.score;
        boxes.push_back(std::move(jb));
      }
      Json jl = Json::object();
      jl["top"] = l.top;
      jl["bottom"] = l.bottom;
      jl["height_median"] = l.height_median;
      jl["center_y"] = l.center_y;
      jl["boxes"] = std::move(boxes);
      lines.push_back(std::move(jl));
    }
    paragraphs.push_back(Json::object({{"lines", std::move(lines)}}));
  }
  return paragraphs;
}

inline Json to_json(std::span<const LayoutDocument> docs) {
  Json pages = Json::array();
  for (const auto& d : docs) {
    Json j = Json::object();
    j["image_id"] = d.image_id;
    j["document_id"] = d.document_id;
    j["paragraphs"] = to_json(d.layout);
    pages.push_back(std::move(j));
  }
  return Json::object({{"pages", std::move(pages)}});
}

inline std::vector<LayoutDocument> layout_documents_from_json(const Json& root,
                                                              const std::string& context = "layout") {
  if (!root.is_object()) throw SchemaError(context + ": top level must be an object");
  const Json& pages = detail::require(root, "pages", context);
  if (!pages.is_array()) throw SchemaError(context + ": 'pages' must be an array");
  std::vector<LayoutDocument> docs;
  for (std::size_t pi = 0; pi < pages.size(); ++pi) {
    const Json& jp = pages[pi];
    const std::string pctx = context + ": pages[" + std::to_string(pi) + "]";
    if (!jp.is_object()) throw SchemaError(pctx + ": must be an object");
    LayoutDocument doc;
    doc.image_id = detail::require_int(jp, "image_id", pctx);
    doc.document_id = detail::require_string(jp, "document_id", pctx);
    const Json& paragraphs = detail::require(jp, "paragraphs", pctx);
    if (!paragraphs.is_array()) throw SchemaError(pctx + ": 'paragraphs' must be an array");
    for (const Json& jpar : paragraphs) {
      if (!jpar.is_object()) throw SchemaError(pctx + ": paragraph must be an object");
      const Json& lines = detail::require(jpar, "lines", pctx);
      if (!lines.is_array()) throw SchemaError(pctx + ": 'lines' must be an array");
      Paragraph par;
      for (const Json& jl : lines) {
        if (!jl.is_object()) throw SchemaError(pctx + ": line must be an object");
        Line line;
        line.top = detail::require_number(jl, "top", pctx);
        line.bottom = detail::require_number(jl, "bottom", pctx);
        line.height_median = detail::require_number(jl, "height_median", pctx);
        line.center_y = detail::require_number(jl, "center_y", pctx);
        const Json& boxes = detail::require(jl, "boxes", pctx);
        if (!boxes.is_array() || boxes.empty()) {
          throw SchemaError(pctx + ": 'boxes' must be a non-empty array");
        }
        for (const Json& jb : boxes) {
          if (!jb.is_object()) throw SchemaError(pctx + ": box must be an object");
          ScoredBox b;
          b.bbox = detail::parse_bbox(jb, pctx);
          b.category_id = detail::require_int(jb, "category_id", pctx);
          b.score = detail::require_number(jb, "score", pctx);
          line.boxes.push_back(b);
        }
        par.lines.push_back(std::move(line));
      }
      doc.layout.paragraphs.push_back(std::move(par));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace papyri
