// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "voxdet/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "voxdet/detail/random.hpp"
#include "voxdet/error.hpp"

namespace voxdet {

StrideSchedule StrideSchedule::standard() {
  StrideSchedule s;
  s.transitions = {
      {1, 2, 2},  // P0 -> P1
      {1, 2, 2},  // P1 -> P2
      {1, 2, 2},  // P2 -> P3
      {2, 2, 2},  // P3 -> P4
      {2, 2, 2},  // P4 -> P5
      {1, 2, 2},  // P5 -> P6
  };
  s.detection_levels = {2, 3, 4, 5, 6};
  return s;
}

std::string_view to_string(FamilyScaling s) noexcept {
  return s == FamilyScaling::Rescale ? "rescale" : "same";
}

FamilyScaling parse_family_scaling(std::string_view name) {
  if (name == "rescale") return FamilyScaling::Rescale;
  if (name == "same") return FamilyScaling::Same;
  throw ConfigError("unknown anchor scaling '" + std::string(name) +
                    "' (expected rescale or same)");
}

std::vector<LevelSpec> build_schedule(const VolumeMeta& volume, const StrideSchedule& schedule) {
  volume.validate();
  std::vector<LevelSpec> levels;
  LevelSpec p0;
  p0.level = 0;
  p0.feature_shape = volume.shape;
  levels.push_back(p0);

  for (std::size_t t = 0; t < schedule.transitions.size(); ++t) {
    const Index3& factor = schedule.transitions[t];
    LevelSpec next;
    next.level = static_cast<int>(t) + 1;
    for (int a = 0; a < 3; ++a) {
      if (factor[a] < 1) {
        throw ConfigError("stride schedule: downscaling factors must be >= 1");
      }
      const LevelSpec& prev = levels.back();
      next.cumulative_stride[a] = prev.cumulative_stride[a] * factor[a];
      next.feature_shape[a] = (prev.feature_shape[a] + factor[a] - 1) / factor[a];
      if (next.feature_shape[a] < 1) {
        throw VolumeTooSmall("feature map of " + next.name() + " would be empty");
      }
    }
    levels.push_back(next);
  }

  for (int d : schedule.detection_levels) {
    if (d < 0 || d >= static_cast<int>(levels.size())) {
      throw ConfigError("stride schedule: detection level P" + std::to_string(d) +
                        " does not exist");
    }
    levels[static_cast<std::size_t>(d)].detection = true;
  }
  return levels;
}

std::vector<LevelSpec> default_stride_schedule(const VolumeMeta& volume) {
  return build_schedule(volume, StrideSchedule::standard());
}

void apply_family(std::vector<LevelSpec>& levels, const std::vector<Vec3>& family,
                  FamilyScaling scaling) {
  for (const Vec3& s : family) {
    for (double e : s) {
      if (!std::isfinite(e) || !(e > 0.0)) {
        throw ConfigError("anchor family shapes must be strictly positive");
      }
    }
  }
  if (levels.empty()) {
    return;
  }
  const std::size_t ref = std::min<std::size_t>(kReferenceLevel, levels.size() - 1);
  const Index3 ref_stride = levels[ref].cumulative_stride;

  for (LevelSpec& level : levels) {
    if (!level.detection) {
      continue;
    }
    level.anchor_shapes.clear();
    for (const Vec3& s : family) {
      Vec3 shape = s;
      if (scaling == FamilyScaling::Rescale) {
        for (int a = 0; a < 3; ++a) {
          shape[a] *= static_cast<double>(level.cumulative_stride[a]) /
                      static_cast<double>(ref_stride[a]);
        }
      }
      level.anchor_shapes.push_back(shape);
    }
  }
}

std::vector<LevelSpec> schedule_from_config(const AnchorConfig& config, const VolumeMeta& volume) {
  auto levels = build_schedule(volume, config.schedule);
  apply_family(levels, config.family, config.scaling);
  return levels;
}

std::size_t expected_anchor_count(const LevelSpec& level, const VolumeMeta& volume) {
  std::size_t cells = 1;
  for (int a = 0; a < 3; ++a) {
    const auto s = level.cumulative_stride[a];
    cells *= static_cast<std::size_t>((volume.shape[a] + s - 1) / s);
  }
  return level.anchor_shapes.size() * cells;
}

AnchorGrid::AnchorGrid(std::vector<LevelSpec> levels, const VolumeMeta& volume)
    : volume_(volume) {
  volume_.validate();
  offsets_.push_back(0);
  for (LevelSpec& level : levels) {
    if (!level.detection) {
      continue;
    }
    std::size_t cells = 1;
    for (int a = 0; a < 3; ++a) {
      cells *= static_cast<std::size_t>(level.feature_shape[a]);
    }
    offsets_.push_back(offsets_.back() + cells * level.anchor_shapes.size());
    levels_.push_back(std::move(level));
  }
}

std::size_t AnchorGrid::level_slot(std::size_t idx) const {
  if (idx >= size()) {
    throw std::out_of_range("AnchorGrid: anchor index out of range");
  }
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), idx);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

Anchor AnchorGrid::at(std::size_t idx) const {
  const std::size_t slot = level_slot(idx);
  const LevelSpec& level = levels_[slot];
  const std::size_t local = idx - offsets_[slot];
  const std::size_t k = level.anchor_shapes.size();
  const std::size_t family = local % k;
  std::size_t cell = local / k;

  Index3 cidx{};
  const auto nx = static_cast<std::size_t>(level.feature_shape[kX]);
  const auto ny = static_cast<std::size_t>(level.feature_shape[kY]);
  cidx[kX] = static_cast<std::int64_t>(cell % nx);
  cell /= nx;
  cidx[kY] = static_cast<std::int64_t>(cell % ny);
  cidx[kZ] = static_cast<std::int64_t>(cell / ny);

  Vec3 center{};
  for (int a = 0; a < 3; ++a) {
    const std::int64_t s = level.cumulative_stride[a];
    const std::int64_t lo = cidx[a] * s;
    const std::int64_t hi = std::min((cidx[a] + 1) * s, volume_.shape[a]);
    center[a] = 0.5 * static_cast<double>(lo + hi);
  }
  return Anchor{Box3::from_center_size(center, level.anchor_shapes[family]), level.level, cidx,
                static_cast<int>(family)};
}

Vec3 AnchorGrid::center(std::size_t idx) const {
  return at(idx).box.center();
}

AnchorGrid generate_anchors(const std::vector<LevelSpec>& schedule, const VolumeMeta& volume) {
  bool any_detection = false;
  for (const LevelSpec& level : schedule) {
    if (!level.detection) {
      continue;
    }
    any_detection = true;
    if (level.anchor_shapes.empty()) {
      throw ConfigMissing("no anchor family configured for detection level " + level.name());
    }
  }
  if (!any_detection) {
    throw ConfigMissing("stride schedule has no detection level");
  }
  return AnchorGrid(schedule, volume);
}

double shape_iou(const Vec3& a, const Vec3& b) noexcept {
  const double inter = std::min(a[0], b[0]) * std::min(a[1], b[1]) * std::min(a[2], b[2]);
  return inter / (a[0] * a[1] * a[2] + b[0] * b[1] * b[2] - inter);
}

namespace {

struct Assignment {
  std::vector<std::size_t> cluster;
  std::vector<double> best;
  double mean = 0.0;
};

Assignment assign(const std::vector<Vec3>& shapes, const std::vector<Vec3>& anchors) {
  Assignment a;
  a.cluster.resize(shapes.size());
  a.best.resize(shapes.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < anchors.size(); ++c) {
      const double v = shape_iou(shapes[i], anchors[c]);
      if (v > best) {
        best = v;
        arg = c;
      }
    }
    a.cluster[i] = arg;
    a.best[i] = best;
    sum += best;
  }
  a.mean = sum / static_cast<double>(shapes.size());
  return a;
}

std::vector<Vec3> kmeanspp_init(const std::vector<Vec3>& shapes, int k, detail::Rng& rng) {
  std::vector<Vec3> centers;
  centers.push_back(shapes[rng.below(shapes.size())]);
  std::vector<double> dist(shapes.size());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      double best = 0.0;
      for (const Vec3& c : centers) best = std::max(best, shape_iou(shapes[i], c));
      dist[i] = (1.0 - best) * (1.0 - best);
      total += dist[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      pick = shapes.size() - 1;
      for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (dist[i] > 0.0 && r < dist[i]) {
          pick = i;
          break;
        }
        r -= dist[i];
      }
      // Guard against rounding landing on an already covered shape.
      if (dist[pick] == 0.0) {
        pick = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
      }
    } else {
      pick = rng.below(shapes.size());
    }
    centers.push_back(shapes[pick]);
  }
  return centers;
}

}  // namespace

double mean_best_iou(const std::vector<Box3>& boxes, const std::vector<Vec3>& shapes) {
  if (boxes.empty() || shapes.empty()) {
    return 0.0;
  }
  std::vector<Vec3> extents;
  extents.reserve(boxes.size());
  for (const Box3& b : boxes) extents.push_back(b.extents());
  return assign(extents, shapes).mean;
}

AnchorFit fit_anchors(const std::vector<Box3>& boxes, int k, int iters, std::uint64_t seed) {
  if (k < 1 || iters < 1) {
    throw ConfigError("fit_anchors: k and iters must be positive");
  }
  if (boxes.size() < static_cast<std::size_t>(k)) {
    std::ostringstream msg;
    msg << "fit_anchors: need at least k = " << k << " boxes, got " << boxes.size();
    throw ConfigError(msg.str());
  }
  std::vector<Vec3> shapes;
  shapes.reserve(boxes.size());
  for (const Box3& b : boxes) shapes.push_back(b.extents());

  detail::Rng rng(seed);
  AnchorFit fit;
  std::vector<Vec3> anchors = kmeanspp_init(shapes, k, rng);
  Assignment cur = assign(shapes, anchors);
  fit.history.push_back(cur.mean);

  for (int it = 0; it < iters; ++it) {
    std::vector<Vec3> sums(static_cast<std::size_t>(k), Vec3{0.0, 0.0, 0.0});
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const std::size_t c = cur.cluster[i];
      for (int a = 0; a < 3; ++a) sums[c][a] += shapes[i][a];
      ++counts[c];
    }
    std::vector<Vec3> next = anchors;
    std::vector<bool> taken(shapes.size(), false);
    for (std::size_t c = 0; c < next.size(); ++c) {
      if (counts[c] > 0) {
        for (int a = 0; a < 3; ++a) next[c][a] = sums[c][a] / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: re-seed with the worst-covered shape not yet used.
      std::size_t worst = 0;
      double worst_iou = 2.0;
      for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (!taken[i] && cur.best[i] < worst_iou) {
          worst_iou = cur.best[i];
          worst = i;
        }
      }
      taken[worst] = true;
      next[c] = shapes[worst];
      ++fit.reseeds;
    }

    Assignment cand = assign(shapes, next);
    fit.iterations = it + 1;
    if (cand.mean < cur.mean) {
      break;
    }
    const bool unchanged = next == anchors;
    anchors = std::move(next);
    cur = std::move(cand);
    fit.history.push_back(cur.mean);
    if (unchanged) {
      break;
    }
  }

  std::sort(anchors.begin(), anchors.end(), [](const Vec3& a, const Vec3& b) {
    return a[0] * a[1] * a[2] < b[0] * b[1] * b[2];
  });
  fit.shapes = std::move(anchors);
  fit.mean_best_iou = cur.mean;
  return fit;
}

}  // namespace voxdet
