// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

// Random scene generators shared by the unit and acceptance tests.

#ifndef VOXDET_TESTS_SUPPORT_HPP
#define VOXDET_TESTS_SUPPORT_HPP

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "voxdet/annotation.hpp"
#include "voxdet/geometry.hpp"
#include "voxdet/losses.hpp"
#include "voxdet/metrics.hpp"

namespace testing_support {

using voxdet::Box3;
using voxdet::Vec3;

inline double uni(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int uint_in(std::mt19937_64& g, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(g);
}

// Integer-cornered box inside [0, n)^3.
inline Box3 int_box(std::mt19937_64& g, int n) {
  Vec3 lo{}, hi{};
  for (int a = 0; a < 3; ++a) {
    const int p = uint_in(g, 0, n - 1), q = uint_in(g, p + 1, n);
    lo[a] = p;
    hi[a] = q;
  }
  return Box3(lo, hi);
}

inline Box3 real_box(std::mt19937_64& g, double span, double min_ext, double max_ext) {
  Vec3 lo{}, hi{};
  for (int a = 0; a < 3; ++a) {
    const double e = uni(g, min_ext, max_ext);
    lo[a] = uni(g, 0.0, span);
    hi[a] = lo[a] + e;
  }
  return Box3(lo, hi);
}

// A pred perturbed from gt so the two overlap.
inline std::pair<voxdet::BoxParam, voxdet::BoxParam> overlapping_pair(std::mt19937_64& g) {
  voxdet::BoxParam gt, pred;
  for (int a = 0; a < 3; ++a) {
    gt.center[a] = uni(g, -5.0, 5.0);
    gt.size[a] = uni(g, 0.5, 6.0);
    pred.size[a] = gt.size[a] * uni(g, 0.6, 1.6);
    pred.center[a] = gt.center[a] + uni(g, -0.3, 0.3) * gt.size[a];
  }
  return {pred, gt};
}

// Small evaluation scene: a few scans, each with up to `max_boxes` gts and
// dets that are jittered copies or random clutter. Scores are quantized so
// ties occur.
inline void toy_scene(std::mt19937_64& g, int max_boxes, std::vector<voxdet::ScanDetections>& dets,
                      std::vector<voxdet::ScanGroundTruth>& gts) {
  dets.clear();
  gts.clear();
  const int scans = uint_in(g, 1, 4);
  for (int s = 0; s < scans; ++s) {
    voxdet::ScanGroundTruth sg;
    sg.scan_id = "scan" + std::to_string(s);
    sg.spacing_mm = {5.0, 1.0, 1.0};
    voxdet::ScanDetections sd;
    sd.scan_id = sg.scan_id;
    const int ng = uint_in(g, 0, max_boxes);
    for (int i = 0; i < ng; ++i)
      sg.gts.push_back({real_box(g, 40.0, 2.0, 30.0), uint_in(g, 0, 1)});
    const int nd = uint_in(g, 0, max_boxes);
    for (int i = 0; i < nd; ++i) {
      Box3 b = real_box(g, 40.0, 2.0, 30.0);
      if (!sg.gts.empty() && uni(g, 0, 1) < 0.7) {
        const Box3& t = sg.gts[static_cast<std::size_t>(uint_in(g, 0, ng - 1))].box;
        Vec3 c = t.center(), e = t.extents();
        for (int a = 0; a < 3; ++a) {
          c[a] += uni(g, -0.25, 0.25) * e[a];
          e[a] *= uni(g, 0.7, 1.3);
        }
        b = Box3::from_center_size(c, e);
      }
      const double score = std::round(uni(g, 0.0, 1.0) * 20.0) / 20.0;
      sd.dets.push_back({b, score, uint_in(g, 0, 1)});
    }
    gts.push_back(std::move(sg));
    dets.push_back(std::move(sd));
  }
}

inline voxdet::LabelMap random_label_map(std::mt19937_64& g, std::int64_t n, double density,
                                         int labels) {
  voxdet::VolumeMeta meta;
  meta.shape = {n, n, n};
  voxdet::LabelMap m(meta);
  for (auto& v : m.voxels)
    v = uni(g, 0.0, 1.0) < density ? static_cast<std::uint16_t>(uint_in(g, 1, labels)) : 0;
  return m;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("voxdet_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_support

#endif  // VOXDET_TESTS_SUPPORT_HPP
