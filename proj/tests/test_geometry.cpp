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

#include "papyri/geometry.hpp"
#include "papyri/random.hpp"

namespace papyri {
namespace {

void ExpectBoxNear(const Box& got, const Box& want, double tol = 1e-12) {
  EXPECT_NEAR(got.x, want.x, tol);
  EXPECT_NEAR(got.y, want.y, tol);
  EXPECT_NEAR(got.w, want.w, tol);
  EXPECT_NEAR(got.h, want.h, tol);
}

Box RandomBox(Rng& rng) {
  return Box{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), rng.uniform(0.1, 30.0),
             rng.uniform(0.1, 30.0)};
}

TEST(IouTest, IdenticalBoxes) { EXPECT_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0); }

TEST(IouTest, DisjointBoxes) { EXPECT_EQ(iou({0, 0, 10, 10}, {20, 0, 10, 10}), 0.0); }

TEST(IouTest, HalfShiftedSquares) {
  // inter 2, union 6
  EXPECT_NEAR(iou({0, 0, 2, 2}, {1, 0, 2, 2}), 1.0 / 3.0, 1e-15);
}

TEST(IouTest, SharedEdgeIsZero) {
  EXPECT_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
  EXPECT_EQ(intersection_area({0, 0, 10, 10}, {0, 10, 10, 10}), 0.0);
}

TEST(IouTest, Containment) { EXPECT_NEAR(iou({0, 0, 10, 10}, {0, 0, 5, 10}), 0.5, 1e-15); }

TEST(IouTest, RandomProperties) {
  Rng rng(7);
  for (int i = 0; i < 5000; ++i) {
    const Box a = RandomBox(rng);
    const Box b = RandomBox(rng);
    const double v = iou(a, b);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_EQ(v, iou(b, a));
    ASSERT_EQ(iou(a, a), 1.0);

    const double dx = rng.uniform(-100.0, 100.0);
    const double dy = rng.uniform(-100.0, 100.0);
    const Box at{a.x + dx, a.y + dy, a.w, a.h};
    const Box bt{b.x + dx, b.y + dy, b.w, b.h};
    ASSERT_NEAR(iou(at, bt), v, 1e-12);

    const double s = rng.uniform(0.1, 10.0);
    const double px = rng.uniform(-20.0, 20.0);
    const double py = rng.uniform(-20.0, 20.0);
    const auto scale = [&](const Box& q) {
      return Box{px + s * (q.x - px), py + s * (q.y - py), s * q.w, s * q.h};
    };
    ASSERT_NEAR(iou(scale(a), scale(b)), v, 1e-12);
  }
}

TEST(FeatherTest, ZeroIsIdentity) { EXPECT_EQ(feather({10, 10, 4, 2}, 0, 0), (Box{10, 10, 4, 2})); }

TEST(FeatherTest, HalfExpansion) { ExpectBoxNear(feather({10, 10, 4, 2}, 0.5, 0.5), {9, 9.5, 6, 3}); }

TEST(FeatherTest, NegativeCoordinatesAllowed) {
  ExpectBoxNear(feather({0, 0, 10, 10}, 0.1, 0.2), {-0.5, -1, 11, 12});
}

TEST(FeatherTest, RandomProperties) {
  Rng rng(11);
  for (int i = 0; i < 5000; ++i) {
    const Box b = RandomBox(rng);
    const double fx = rng.uniform(0.0, 2.0);
    const double fy = rng.uniform(0.0, 2.0);
    const Box f = feather(b, fx, fy);
    ASSERT_EQ(feather(b, 0, 0), b);
    ASSERT_NEAR(f.center_x(), b.center_x(), 1e-12);
    ASSERT_NEAR(f.center_y(), b.center_y(), 1e-12);
    ASSERT_NEAR(f.w * f.h, b.w * b.h * (1 + fx) * (1 + fy), 1e-9 * b.w * b.h * (1 + fx) * (1 + fy));
  }
}

TEST(BoxTest, Validity) {
  EXPECT_TRUE(is_valid({0, 0, 1, 1}));
  EXPECT_FALSE(is_valid({0, 0, 0, 1}));
  EXPECT_FALSE(is_valid({0, 0, 1, -1}));
  EXPECT_FALSE(is_valid({std::nan(""), 0, 1, 1}));
}

TEST(BoxTest, VerticalOverlap) {
  EXPECT_EQ(vertical_overlap({0, 0, 5, 10}, {100, 4, 5, 10}), 6.0);
  EXPECT_EQ(vertical_overlap({0, 0, 5, 10}, {0, 20, 5, 10}), 0.0);
}

}  // namespace
}  // namespace papyri
