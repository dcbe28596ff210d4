// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "voxdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "voxdet/error.hpp"

namespace voxdet {

Box3::Box3(const Vec3& min, const Vec3& max) : min_(min), max_(max) {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(min_[i]) || !std::isfinite(max_[i]) || !(min_[i] < max_[i])) {
      std::ostringstream msg;
      msg << "Box3: min must be strictly below max on every axis, got " << *this;
      throw InvalidBox(msg.str());
    }
  }
}

Box3 Box3::from_center_size(const Vec3& center, const Vec3& size) {
  Vec3 lo{}, hi{};
  for (int i = 0; i < 3; ++i) {
    lo[i] = center[i] - 0.5 * size[i];
    hi[i] = center[i] + 0.5 * size[i];
  }
  return Box3(lo, hi);
}

Vec3 Box3::extents() const noexcept {
  return {extent(0), extent(1), extent(2)};
}

Vec3 Box3::center() const noexcept {
  return {0.5 * (min_[0] + max_[0]), 0.5 * (min_[1] + max_[1]), 0.5 * (min_[2] + max_[2])};
}

std::ostream& operator<<(std::ostream& os, const Box3& b) {
  return os << "(" << b.min()[0] << "," << b.min()[1] << "," << b.min()[2] << ")-("
            << b.max()[0] << "," << b.max()[1] << "," << b.max()[2] << ")";
}

void VolumeMeta::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (shape[i] < 1) {
      throw VolumeTooSmall("volume shape must be >= 1 on every axis");
    }
    if (!std::isfinite(spacing_mm[i]) || !(spacing_mm[i] > 0.0)) {
      throw ConfigError("voxel spacing must be positive and finite on every axis");
    }
  }
}

double volume(const Box3& b) noexcept {
  return b.extent(0) * b.extent(1) * b.extent(2);
}

double physical_volume_cm3(const Box3& b, const Vec3& spacing_mm) noexcept {
  return volume(b) * spacing_mm[0] * spacing_mm[1] * spacing_mm[2] / 1000.0;
}

double intersection_volume(const Box3& a, const Box3& b) noexcept {
  double v = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double lo = std::max(a.min()[i], b.min()[i]);
    const double hi = std::min(a.max()[i], b.max()[i]);
    if (hi <= lo) {
      return 0.0;
    }
    v *= hi - lo;
  }
  return v;
}

double iou(const Box3& a, const Box3& b) noexcept {
  const double inter = intersection_volume(a, b);
  if (inter == 0.0) {
    return 0.0;
  }
  return inter / (volume(a) + volume(b) - inter);
}

Box3 enclosing_box(const Box3& a, const Box3& b) noexcept {
  Vec3 lo{}, hi{};
  for (int i = 0; i < 3; ++i) {
    lo[i] = std::min(a.min()[i], b.min()[i]);
    hi[i] = std::max(a.max()[i], b.max()[i]);
  }
  return Box3(lo, hi);
}

bool contains(const Box3& outer, const Box3& inner) noexcept {
  for (int i = 0; i < 3; ++i) {
    if (inner.min()[i] < outer.min()[i] || inner.max()[i] > outer.max()[i]) {
      return false;
    }
  }
  return true;
}

bool strictly_contains(const Box3& b, const Vec3& p) noexcept {
  for (int i = 0; i < 3; ++i) {
    if (!(p[i] > b.min()[i] && p[i] < b.max()[i])) {
      return false;
    }
  }
  return true;
}

double center_distance_sq(const Box3& a, const Box3& b) noexcept {
  const Vec3 ca = a.center();
  const Vec3 cb = b.center();
  double d = 0.0;
  for (int i = 0; i < 3; ++i) {
    d += (ca[i] - cb[i]) * (ca[i] - cb[i]);
  }
  return d;
}

double enclosing_diagonal_sq(const Box3& a, const Box3& b) noexcept {
  double c = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double e = std::max(a.max()[i], b.max()[i]) - std::min(a.min()[i], b.min()[i]);
    c += e * e;
  }
  return c;
}

double aspect_term(const Vec3& pred_size, const Vec3& gt_size) noexcept {
  const double d = pred_size[kZ], h = pred_size[kY], w = pred_size[kX];
  const double dg = gt_size[kZ], hg = gt_size[kY], wg = gt_size[kX];
  const double t1 = std::atan(wg / hg) - std::atan(w / h);
  const double t2 = std::atan(hg / dg) - std::atan(h / d);
  const double t3 = std::atan(dg / wg) - std::atan(d / w);
  constexpr double k = 4.0 / (std::numbers::pi * std::numbers::pi);
  return k * (t1 * t1 + t2 * t2 + t3 * t3);
}

double aspect_term(const Box3& pred, const Box3& gt) noexcept {
  return aspect_term(pred.extents(), gt.extents());
}

}  // namespace voxdet
