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

#include <algorithm>
#include <cmath>

namespace papyri {

// Axis-aligned box in COCO convention: top-left corner plus extent, in
// continuous pixel coordinates. Boxes are closed rectangles, so two boxes
// that only share an edge intersect with zero area.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  constexpr double left() const { return x; }
  constexpr double top() const { return y; }
  constexpr double right() const { return x + w; }
  constexpr double bottom() const { return y + h; }
  constexpr double center_x() const { return x + 0.5 * w; }
  constexpr double center_y() const { return y + 0.5 * h; }

  // Area measured between the corners, so that it agrees bit-for-bit with
  // the intersection of a box with itself.
  constexpr double area() const { return (right() - left()) * (bottom() - top()); }

  friend constexpr bool operator==(const Box&, const Box&) = default;
};

inline bool is_valid(const Box& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) &&
         std::isfinite(b.h) && b.w > 0.0 && b.h > 0.0;
}

inline Box box_from_corners(double x1, double y1, double x2, double y2) {
  return Box{x1, y1, x2 - x1, y2 - y1};
}

inline double intersection_area(const Box& a, const Box& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  if (iw <= 0.0) return 0.0;
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (ih <= 0.0) return 0.0;
  return iw * ih;
}

// Intersection over union; 0 for disjoint or edge-touching boxes.
inline double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// Length of the overlap of the vertical extents of two boxes (0 if none).
inline double vertical_overlap(const Box& a, const Box& b) {
  return std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
}

// Grows width by (1 + fx) and height by (1 + fy) about the box center.
// Coordinates may go negative; callers clamp if they need to.
inline Box feather(const Box& b, double fx, double fy) {
  return Box{b.x - 0.5 * fx * b.w, b.y - 0.5 * fy * b.h, b.w * (1.0 + fx), b.h * (1.0 + fy)};
}

}  // namespace papyri
