// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "voxdet/error.hpp"
#include "voxdet/nms.hpp"

using namespace voxdet;

TEST_CASE("identical boxes keep the higher score") {
  const Box3 b({0, 0, 0}, {2, 2, 2});
  const std::vector<Detection> d{{b, 0.8, 0}, {b, 0.9, 0}};
  const auto out = nms(d, 0.5);
  REQUIRE(out.size() == 1);
  CHECK(out[0].score == 0.9);
}

TEST_CASE("disjoint boxes survive") {
  const std::vector<Detection> d{{Box3({0, 0, 0}, {1, 1, 1}), 0.5, 0},
                                 {Box3({3, 3, 3}, {4, 4, 4}), 0.6, 0}};
  for (double t : {0.01, 0.5, 0.99}) CHECK(nms(d, t).size() == 2);
}

TEST_CASE("labels are suppressed independently") {
  const Box3 b({0, 0, 0}, {2, 2, 2});
  const std::vector<Detection> d{{b, 0.9, 0}, {b, 0.8, 1}};
  CHECK(nms(d, 0.5).size() == 2);
}

TEST_CASE("empty input and max_out") {
  CHECK(nms({}, 0.5).empty());
  std::vector<Detection> d;
  for (int i = 0; i < 10; ++i) d.push_back({Box3({i * 2.0, 0, 0}, {i * 2.0 + 1, 1, 1}), 0.5, 0});
  const auto idx = nms_indices(d, 0.5, 3);
  CHECK(idx == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("random sets agree with the reference") {
  std::mt19937_64 g(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> d;
    const int n = testing_support::uint_in(g, 0, 20);
    for (int i = 0; i < n; ++i)
      d.push_back({testing_support::real_box(g, 10.0, 1.0, 8.0),
                   std::round(testing_support::uni(g, 0, 1) * 10) / 10,
                   testing_support::uint_in(g, 0, 1)});
    const double t = testing_support::uni(g, 0.05, 0.9);
    CHECK(nms_indices(d, t, 100) == oracle::nms(d, t, 100));
    CHECK(nms_indices(d, 0.3, 5) == oracle::nms(d, 0.3, 5));
  }
}

TEST_CASE("raising the threshold can remove a survivor") {
  // At 0.35 A suppresses B, which frees C and D. At 0.5 B survives and
  // suppresses both, so the output shrinks from three boxes to two.
  const Box3 a({0, 3, 0}, {1, 10, 10});
  const Box3 b({0, 0, 0}, {1, 7, 10});
  const Box3 c({0, 0, 0}, {1, 7, 6});
  const Box3 d({0, 0, 4}, {1, 7, 10});
  CHECK(iou(a, b) == doctest::Approx(0.4));
  CHECK(iou(b, c) == doctest::Approx(0.6));
  CHECK(iou(b, d) == doctest::Approx(0.6));
  CHECK(iou(a, c) == doctest::Approx(24.0 / 88.0));
  CHECK(iou(c, d) == doctest::Approx(0.2));
  const std::vector<Detection> dets{{a, 0.9, 0}, {b, 0.8, 0}, {c, 0.7, 0}, {d, 0.6, 0}};
  CHECK(nms_indices(dets, 0.35, 100) == std::vector<std::size_t>{0, 2, 3});
  CHECK(nms_indices(dets, 0.5, 100) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("survivors are separated and every removal is justified") {
  std::mt19937_64 g(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> d;
    const int n = testing_support::uint_in(g, 1, 20);
    for (int i = 0; i < n; ++i)
      d.push_back({testing_support::real_box(g, 8.0, 1.0, 6.0), testing_support::uni(g, 0, 1), 0});
    const double t = testing_support::uni(g, 0.05, 0.9);
    const auto kept = nms_indices(d, t, 100);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        CHECK(iou(d[kept[i]].box, d[kept[j]].box) <= t);
        CHECK(d[kept[i]].score >= d[kept[j]].score);
      }
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (std::find(kept.begin(), kept.end(), i) != kept.end()) continue;
      bool justified = false;
      for (std::size_t k : kept)
        justified = justified || (d[k].score >= d[i].score && iou(d[k].box, d[i].box) > t);
      CHECK(justified);
    }
  }
}

TEST_CASE("argument validation") {
  const std::vector<Detection> d{{Box3({0, 0, 0}, {1, 1, 1}), 0.5, 0}};
  CHECK_THROWS_AS(nms(d, 0.0), ConfigError);
  CHECK_THROWS_AS(nms(d, 1.0), ConfigError);
  const std::vector<Detection> bad{{Box3({0, 0, 0}, {1, 1, 1}), 1.5, 0}};
  CHECK_THROWS_AS(nms(bad, 0.5), ConfigError);
}
