// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "voxdet/error.hpp"
#include "voxdet/geometry.hpp"

using namespace voxdet;

TEST_CASE("box construction rejects degenerate and non-finite boxes") {
  CHECK_THROWS_AS(Box3({0, 0, 0}, {0, 1, 1}), InvalidBox);
  CHECK_THROWS_AS(Box3({0, 0, 0}, {1, -1, 1}), InvalidBox);
  CHECK_THROWS_AS(Box3({0, 0, 0}, {1, 1, NAN}), InvalidBox);
  CHECK_THROWS_AS(Box3({0, 0, -INFINITY}, {1, 1, 1}), InvalidBox);
  CHECK_NOTHROW(Box3({0, 0, 0}, {1e-9, 1, 1}));
}

TEST_CASE("volume") {
  CHECK(volume(Box3({0, 0, 0}, {1, 1, 1})) == 1.0);
  CHECK(volume(Box3({0, 0, 0}, {2, 3, 4})) == 24.0);
  CHECK(volume(Box3({1.5, 0, 0}, {2.5, 2, 2})) == 4.0);
}

TEST_CASE("physical volume uses spacing") {
  // 10 x 10 x 10 voxels of 1 mm = 1 cm^3
  CHECK(physical_volume_cm3(Box3({0, 0, 0}, {10, 10, 10}), {1, 1, 1}) == doctest::Approx(1.0));
  CHECK(physical_volume_cm3(Box3({0, 0, 0}, {2, 10, 10}), {5, 1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("iou") {
  const Box3 a({0, 0, 0}, {2, 2, 2});
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, Box3({1, 1, 1}, {3, 3, 3})) == doctest::Approx(1.0 / 15.0).epsilon(1e-15));
  CHECK(iou(Box3({0, 0, 0}, {1, 1, 1}), Box3({5, 5, 5}, {6, 6, 6})) == 0.0);
  // touching faces share no volume
  CHECK(iou(a, Box3({2, 0, 0}, {4, 2, 2})) == 0.0);
}

TEST_CASE("iou is symmetric and equals voxel counting") {
  std::mt19937_64 g(3);
  for (int i = 0; i < 300; ++i) {
    const Box3 a = testing_support::int_box(g, 10), b = testing_support::int_box(g, 10);
    CHECK(iou(a, b) == iou(b, a));
    CHECK(iou(a, b) == oracle::voxel_iou(a, b));
  }
}

TEST_CASE("enclosing box") {
  const Box3 a({0, 0, 0}, {1, 1, 1});
  CHECK(enclosing_box(a, a) == a);
  CHECK(enclosing_box(a, Box3({2, 2, 2}, {3, 3, 3})) == Box3({0, 0, 0}, {3, 3, 3}));
  CHECK(enclosing_box(Box3({0, 0, 0}, {4, 1, 1}), Box3({1, 0, 0}, {2, 5, 1})) ==
        Box3({0, 0, 0}, {4, 5, 1}));
}

TEST_CASE("center distance") {
  const Box3 a({0, 0, 0}, {2, 2, 2});
  CHECK(center_distance_sq(a, a) == 0.0);
  CHECK(center_distance_sq(a, Box3({1, 1, 1}, {3, 3, 3})) == 3.0);
  CHECK(center_distance_sq(Box3::from_center_size({0, 0, 0}, {1, 1, 1}),
                           Box3::from_center_size({0, 3, 4}, {1, 1, 1})) == 25.0);
}

TEST_CASE("enclosing diagonal") {
  CHECK(enclosing_diagonal_sq(Box3({0, 0, 0}, {2, 2, 2}), Box3({1, 1, 1}, {3, 3, 3})) == 27.0);
}

TEST_CASE("aspect term") {
  const Box3 gt = Box3::from_center_size({0, 0, 0}, {2, 2, 2});
  CHECK(aspect_term(gt, gt) == 0.0);
  CHECK(aspect_term(Box3::from_center_size({0, 0, 0}, {4, 4, 4}), gt) == 0.0);
  // d = 4, h = w = 2
  const double pi = std::acos(-1.0);
  const double by_hand = 4.0 / (pi * pi) *
                         (std::pow(std::atan(1.0) - std::atan(0.5), 2) +
                          std::pow(std::atan(2.0) - std::atan(1.0), 2));
  const double v = aspect_term(Box3::from_center_size({0, 0, 0}, {4, 2, 2}), gt);
  CHECK(v == doctest::Approx(by_hand).epsilon(1e-14));
  CHECK(v == doctest::Approx(0.0839).epsilon(1e-3));
}

TEST_CASE("containment") {
  const Box3 a({0, 0, 0}, {4, 4, 4});
  CHECK(contains(a, Box3({1, 1, 1}, {4, 4, 4})));
  CHECK_FALSE(contains(a, Box3({1, 1, 1}, {5, 4, 4})));
  CHECK(strictly_contains(a, {2, 2, 2}));
  CHECK_FALSE(strictly_contains(a, {0, 2, 2}));
  CHECK_FALSE(strictly_contains(a, {2, 2, 4}));
}

TEST_CASE("volume meta validation") {
  VolumeMeta m;
  m.shape = {0, 4, 4};
  CHECK_THROWS_AS(m.validate(), VolumeTooSmall);
  m.shape = {1, 4, 4};
  m.spacing_mm = {0, 1, 1};
  CHECK_THROWS_AS(m.validate(), ConfigError);
}
